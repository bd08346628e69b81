#include "liouvlab/harness/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace liouvlab::harness {

namespace {

constexpr char kMagic[8] = {'L', 'V', 'L', 'B', 'E', 'N', 'S', '\0'};
constexpr std::uint32_t kEndianTag = 0x01020304u;

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
public:
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    static_assert(sizeof(T) == sizeof(U));
    U u = std::bit_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<char>((u >> (8 * i)) & 0xffu));
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  std::string& str() { return buf_; }

private:
  std::string buf_;
};

class Reader {
public:
  explicit Reader(const std::string& s, std::size_t end) : s_(s), end_(end) {}
  template <class T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(U));
    U u = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) u |= static_cast<U>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return std::bit_cast<T>(u);
  }
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw IntegrityError("ensemble container: truncated");
  }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

private:
  const std::string& s_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

} // namespace

std::string encode_ensemble(const CovariantEnsemble& a) {
  const auto& g = a.geometry();
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kContainerVersion);
  w.put<std::uint32_t>(kEndianTag);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.dimension()));
  for (int e : g.extents()) w.put<std::int32_t>(e);
  w.put<double>(g.spacing());
  w.put<std::uint32_t>(g.boundary() == Boundary::open ? 0u : 1u);
  for (double o : g.origin()) w.put<double>(o);
  w.put<std::uint32_t>(a.averaging() == CellAveraging::all_cells ? 1u : 0u);
  w.put<std::uint64_t>(a.size());
  w.put<std::uint64_t>(static_cast<std::uint64_t>(g.num_sites()));
  for (auto s : a.seeds()) w.put<std::uint64_t>(s);
  for (const auto& m : a.matrices())
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      w.put<double>(m.data()[k].real());
      w.put<double>(m.data()[k].imag());
    }
  const std::uint64_t sum = fnv1a(w.str().data(), w.str().size());
  w.put<std::uint64_t>(sum);
  return std::move(w.str());
}

CovariantEnsemble decode_ensemble(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 16) throw IntegrityError("ensemble container: truncated header");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw IntegrityError("ensemble container: bad magic");
  Reader r(bytes, bytes.size() - 8);
  r.skip(sizeof(kMagic));
  const auto version = r.get<std::uint32_t>();
  if (version != kContainerVersion)
    throw VersionError("ensemble container: version " + std::to_string(version) + ", expected " +
                       std::to_string(kContainerVersion));
  if (r.get<std::uint32_t>() != kEndianTag) throw IntegrityError("ensemble container: bad endianness tag");
  Reader tail(bytes, bytes.size());
  tail.skip(bytes.size() - 8);
  const auto stored = tail.get<std::uint64_t>();
  if (stored != fnv1a(bytes.data(), bytes.size() - 8)) throw IntegrityError("ensemble container: checksum mismatch");

  const auto d = r.get<std::uint32_t>();
  if (d < 1 || d > 3) throw IntegrityError("ensemble container: bad dimension");
  std::vector<int> extent(d);
  for (auto& e : extent) e = r.get<std::int32_t>();
  const double spacing = r.get<double>();
  const auto boundary = r.get<std::uint32_t>();
  std::vector<double> origin(d);
  for (auto& o : origin) o = r.get<double>();
  const auto averaging = r.get<std::uint32_t>();
  const auto m = r.get<std::uint64_t>();
  const auto n = r.get<std::uint64_t>();
  if (boundary > 1 || averaging > 1) throw IntegrityError("ensemble container: bad enum value");
  const std::size_t remaining = bytes.size() - 8 - r.pos();
  if (m > remaining / 8 || (m != 0 && n * n > (remaining - 8 * m) / (16 * m)) ||
      remaining != 8 * m + 16 * m * n * n)
    throw IntegrityError("ensemble container: size does not match the header");

  std::shared_ptr<const LatticeGeometry> geo;
  try {
    geo = std::make_shared<const LatticeGeometry>(extent, boundary == 0 ? Boundary::open : Boundary::periodic,
                                                  spacing, origin);
  } catch (const InputError& e) {
    throw IntegrityError(std::string("ensemble container: invalid geometry: ") + e.what());
  }
  if (static_cast<std::uint64_t>(geo->num_sites()) != n)
    throw IntegrityError("ensemble container: matrix size does not match the geometry");
  std::vector<std::uint64_t> seeds(m);
  for (auto& s : seeds) s = r.get<std::uint64_t>();
  std::vector<CMatrix> mats(m, CMatrix(n, n));
  for (auto& mat : mats)
    for (Eigen::Index k = 0; k < mat.size(); ++k) {
      const double re = r.get<double>();
      const double im = r.get<double>();
      mat.data()[k] = Complex(re, im);
    }
  return CovariantEnsemble(geo, std::move(seeds), std::move(mats),
                           averaging == 1 ? CellAveraging::all_cells : CellAveraging::single_cell);
}

void save_ensemble(const std::filesystem::path& path, const CovariantEnsemble& a) {
  const std::string bytes = encode_ensemble(a);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

CovariantEnsemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ensemble(bytes);
}

} // namespace liouvlab::harness
