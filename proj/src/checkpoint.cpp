#include "qfc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "qfc/csv.hpp"
#include "qfc/errors.hpp"

namespace qfc {

namespace {

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) r |= ((v >> (8 * i)) & 0xff) << (8 * (sizeof(U) - 1 - i));
    return r;
  }
  return v;
}

void put_u32(std::string& out, std::uint32_t v) {
  v = to_little(v);
  out.append(reinterpret_cast<const char*>(&v), 4);
}

void put_f64(std::string& out, double d) {
  std::uint64_t v = to_little(std::bit_cast<std::uint64_t>(d));
  out.append(reinterpret_cast<const char*>(&v), 8);
}

class Reader {
 public:
  Reader(std::string bytes, std::string path) : b_(std::move(bytes)), path_(std::move(path)) {}

  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, take(4), 4);
    return to_little(v);
  }
  double f64() {
    std::uint64_t v;
    std::memcpy(&v, take(8), 8);
    return std::bit_cast<double>(to_little(v));
  }
  const char* take(std::size_t n) {
    if (pos_ + n > b_.size()) throw ConfigError("checkpoint '" + path_ + "' is truncated");
    const char* p = b_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  std::string b_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const std::string& path, const ModeState& s) {
  const int n = static_cast<int>(s.alpha.size());
  if (n < 1 || s.beta.size() != n) throw ConfigError("write_checkpoint: band sizes differ or are empty");
  const int m = grid_size_for(n);
  const VectorXc a = to_time_domain(s.alpha, m);
  const VectorXc b = to_time_domain(s.beta, m);
  std::string out = "QFC1";
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(n));
  put_f64(out, s.t);
  for (const VectorXc* f : {&a, &b})
    for (int k = 0; k < m; ++k) {
      put_f64(out, (*f)(k).real());
      put_f64(out, (*f)(k).imag());
    }
  atomic_write(path, out);
}

ModeState read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}), path);
  if (std::string(r.take(4), 4) != "QFC1") throw ConfigError("'" + path + "' is not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw ConfigError("checkpoint '" + path + "' has unsupported version " + std::to_string(version));
  const std::uint32_t n = r.u32();
  if (n < 1 || n > (1u << 24)) throw ConfigError("checkpoint '" + path + "' has an invalid mode count");
  const int m = grid_size_for(static_cast<int>(n));
  ModeState s;
  s.t = r.f64();
  VectorXc a(m), b(m);
  for (VectorXc* f : {&a, &b})
    for (int k = 0; k < m; ++k) {
      const double re = r.f64();
      (*f)(k) = cplx(re, r.f64());
    }
  if (!r.done()) throw ConfigError("checkpoint '" + path + "' has trailing bytes");
  s.alpha = to_mode_domain(a, static_cast<int>(n));
  s.beta = to_mode_domain(b, static_cast<int>(n));
  return s;
}

}  // namespace qfc
