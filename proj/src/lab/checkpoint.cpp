#include "nls/lab/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "nls/error.hpp"

namespace nls::lab {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'S', 'C', 'H', 'K', 'P', 'T'};

std::uint8_t* put_u32(std::uint8_t* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) *out++ = static_cast<std::uint8_t>(v >> (8 * i));
  return out;
}
std::uint8_t* put_f64(std::uint8_t* out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) *out++ = static_cast<std::uint8_t>(bits >> (8 * i));
  return out;
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::size_t offset() const { return pos_; }
  void need(std::size_t k, const char* what) const {
    if (b_.size() - pos_ < k) throw FormatError(std::string("truncated while reading ") + what, pos_);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  const std::uint8_t* take(std::size_t k, const char* what) {
    need(k, what);
    const std::uint8_t* p = b_.data() + pos_;
    pos_ += k;
    return p;
  }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Field& f) {
  std::vector<std::uint8_t> out(kCheckpointHeaderBytes + 16 * f.size());
  std::uint8_t* w = std::copy(std::begin(kMagic), std::end(kMagic), out.data());
  w = put_u32(w, kCheckpointVersion);
  w = put_u32(w, static_cast<std::uint32_t>(f.d()));
  w = put_f64(w, f.params.p);
  w = put_u32(w, static_cast<std::uint32_t>(f.grid.n));
  w = put_f64(w, f.grid.L);
  w = put_f64(w, f.t);
  for (const auto& z : f.values) {
    w = put_f64(w, z.real());
    w = put_f64(w, z.imag());
  }
  return out;
}

Field decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader rd(bytes);
  const std::uint8_t* magic = rd.take(8, "magic");
  for (int i = 0; i < 8; ++i)
    if (magic[i] != static_cast<std::uint8_t>(kMagic[i])) throw FormatError("bad magic", i);
  const std::size_t ver_at = rd.offset();
  const std::uint32_t version = rd.u32("version");
  if (version != kCheckpointVersion) throw UnsupportedVersion(version, ver_at);
  const std::size_t d_at = rd.offset();
  const std::uint32_t d = rd.u32("d");
  const std::size_t p_at = rd.offset();
  const double p = rd.f64("p");
  const std::size_t n_at = rd.offset();
  const std::uint32_t n = rd.u32("n");
  const std::size_t L_at = rd.offset();
  const double L = rd.f64("L");
  const std::size_t t_at = rd.offset();
  const double t = rd.f64("t");
  if (!std::isfinite(t)) throw FormatError("non-finite time", t_at);

  PhysParams params;
  try {
    params = PhysParams::make(static_cast<int>(d), p);
  } catch (const Error& e) {
    throw FormatError(std::string("invalid (d, p): ") + e.what(), d < 1 || d > 3 ? d_at : p_at);
  }
  GridSpec grid;
  try {
    grid = GridSpec::make(L, static_cast<int>(n));
  } catch (const Error& e) {
    throw FormatError(std::string("invalid grid: ") + e.what(), std::isfinite(L) && L > 0.0 ? n_at : L_at);
  }

  const std::size_t remaining = bytes.size() - rd.offset();
  const long double expected = 16.0L * std::pow(static_cast<long double>(grid.n), params.d);
  if (expected != static_cast<long double>(remaining)) {
    const std::size_t stop = expected < remaining ? static_cast<std::size_t>(expected) : remaining;
    throw FormatError("payload holds " + std::to_string(remaining) + " bytes, expected " +
                          std::to_string(static_cast<unsigned long long>(expected)),
                      rd.offset() + stop);
  }
  const std::size_t count = grid_size(params.d, grid.n);
  Field f(params, grid, t);
  for (std::size_t i = 0; i < count; ++i) {
    const double re = rd.f64("payload");
    const double im = rd.f64("payload");
    if (!std::isfinite(re) || !std::isfinite(im)) throw FormatError("non-finite payload value", rd.offset() - 16);
    f.values[i] = cplx(re, im);
  }
  return f;
}

void save_checkpoint(const Field& f, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(f);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open " + tmp.string() + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Field load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace nls::lab
