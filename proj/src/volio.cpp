#include "odt/volio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace odt {

namespace {

constexpr char kMagic[4] = {'V', 'O', 'L', '3'};
constexpr std::size_t kHeaderSize = 4 + 2 + 2 + 3 * 4 + 3 * 8;

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  static_assert(std::endian::native == std::endian::little,
                "explicit byte swap needed on big-endian hosts");
  put_bytes(out, &v, sizeof v);
}

void put_f32(std::vector<std::uint8_t>& out, double v) { put_le(out, float(v)); }

class Reader {
 public:
  Reader(const std::filesystem::path& path, std::uint64_t max_bytes) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path_ + "'");
    in.seekg(0, std::ios::end);
    const std::uint64_t size = std::uint64_t(in.tellg());
    if (size > max_bytes)
      throw FormatError("'" + path_ + "' exceeds the allocation cap (" +
                        std::to_string(max_bytes) + " bytes)");
    in.seekg(0);
    bytes_.resize(size);
    in.read(reinterpret_cast<char*>(bytes_.data()), std::streamsize(size));
    if (!in) throw IoError("short read on '" + path_ + "'");
  }

  GridSpec header(std::uint16_t expected_kind) {
    if (bytes_.size() < kHeaderSize || std::memcmp(bytes_.data(), kMagic, 4) != 0)
      throw FormatError("'" + path_ + "': bad magic (not a VOL3 file)");
    pos_ = 4;
    const auto version = take<std::uint16_t>();
    if (version != vol3::kVersion)
      throw FormatError("'" + path_ + "': unsupported format version " + std::to_string(version));
    const auto kind = take<std::uint16_t>();
    if (kind != expected_kind)
      throw FormatError("'" + path_ + "': payload kind " + std::to_string(kind) +
                        " does not match the requested type");
    GridSpec g;
    g.nx = int(take<std::uint32_t>());
    g.ny = int(take<std::uint32_t>());
    g.nz = int(take<std::uint32_t>());
    g.dx = take<double>();
    g.dy = take<double>();
    g.dz = take<double>();
    if (g.nx <= 0 || g.ny <= 0 || g.nz <= 0 || g.nx > (1 << 24) || g.ny > (1 << 24) ||
        g.nz > (1 << 24))
      throw FormatError("'" + path_ + "': dimension overflow");
    g.validate();
    return g;
  }

  void expect_payload(std::uint64_t bytes_per_voxel, std::uint64_t count) {
    const std::uint64_t want = bytes_per_voxel * count;
    if (want / bytes_per_voxel != count) throw FormatError("'" + path_ + "': dimension overflow");
    if (bytes_.size() - kHeaderSize != want)
      throw FormatError("'" + path_ + "': payload truncated or oversized (" +
                        std::to_string(bytes_.size() - kHeaderSize) + " bytes, expected " +
                        std::to_string(want) + ")");
  }

  template <typename T>
  T take() {
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }

  const std::uint8_t* payload() const { return bytes_.data() + kHeaderSize; }

 private:
  std::string path_;
  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> header_bytes(const GridSpec& g, std::uint16_t kind) {
  std::vector<std::uint8_t> out;
  put_bytes(out, kMagic, 4);
  put_le(out, vol3::kVersion);
  put_le(out, kind);
  put_le(out, std::uint32_t(g.nx));
  put_le(out, std::uint32_t(g.ny));
  put_le(out, std::uint32_t(g.nz));
  put_le(out, g.dx);
  put_le(out, g.dy);
  put_le(out, g.dz);
  return out;
}

// Write to a sibling temp file, then rename over the target.
void write_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed on '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

}  // namespace

void write_vol(const std::filesystem::path& path, const Volume3& v) {
  require_sized(v, "write_vol");
  auto bytes = header_bytes(v.grid, vol3::kKindReal);
  bytes.reserve(bytes.size() + v.data.size() * 4);
  for (double x : v.data) put_f32(bytes, x);
  write_atomic(path, bytes);
}

void write_spec(const std::filesystem::path& path, const Spectrum3& s) {
  require_sized(s, "write_spec");
  auto bytes = header_bytes(s.grid, vol3::kKindComplex);
  bytes.reserve(bytes.size() + s.data.size() * 8);
  for (const auto& z : s.data) {
    put_f32(bytes, z.real());
    put_f32(bytes, z.imag());
  }
  write_atomic(path, bytes);
}

void write_mask(const std::filesystem::path& path, const SupportMask& m) {
  require_sized(m, "write_mask");
  auto bytes = header_bytes(m.grid, vol3::kKindMask);
  bytes.reserve(bytes.size() + m.data.size());
  for (auto v : m.data) bytes.push_back(v ? 1 : 0);
  write_atomic(path, bytes);
}

Volume3 read_vol(const std::filesystem::path& path, std::uint64_t max_bytes) {
  Reader r(path, max_bytes);
  const GridSpec g = r.header(vol3::kKindReal);
  r.expect_payload(4, g.count());
  Volume3 v(g);
  const auto* p = r.payload();
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    float f;
    std::memcpy(&f, p + i * 4, 4);
    v.data[i] = f;
  }
  return v;
}

Spectrum3 read_spec(const std::filesystem::path& path, std::uint64_t max_bytes) {
  Reader r(path, max_bytes);
  const GridSpec g = r.header(vol3::kKindComplex);
  r.expect_payload(8, g.count());
  Spectrum3 s(g);
  const auto* p = r.payload();
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    float re, im;
    std::memcpy(&re, p + i * 8, 4);
    std::memcpy(&im, p + i * 8 + 4, 4);
    s.data[i] = {double(re), double(im)};
  }
  return s;
}

SupportMask read_mask(const std::filesystem::path& path, std::uint64_t max_bytes) {
  Reader r(path, max_bytes);
  const GridSpec g = r.header(vol3::kKindMask);
  r.expect_payload(1, g.count());
  SupportMask m(g);
  const auto* p = r.payload();
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    if (p[i] > 1) throw FormatError("'" + path.string() + "': mask byte out of range");
    m.data[i] = p[i];
  }
  return m;
}

void write_raw_f32(const std::filesystem::path& path, const Volume3& v) {
  require_sized(v, "write_raw_f32");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(v.data.size() * 4);
  for (double x : v.data) put_f32(bytes, x);
  write_atomic(path, bytes);
}

}  // namespace odt
