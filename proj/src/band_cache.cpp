#include "tdbem/band_cache.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace tdbem {

namespace {
constexpr char kMagic[8] = {'T', 'D', 'B', 'E', 'M', 'B', 'N', 'D'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void write_band_cache(const std::string& path, const std::vector<Eigen::MatrixXd>& bands,
                      int k_min, double dt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_band_cache: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::int32_t>(bands.size()));
  write_pod(out, static_cast<std::int32_t>(bands.empty() ? 0 : bands.front().rows()));
  write_pod(out, static_cast<std::int32_t>(k_min));
  write_pod(out, dt);
  for (size_t bi = 0; bi < bands.size(); ++bi) {
    const Eigen::MatrixXd& band = bands[bi];
    write_pod(out, static_cast<std::int32_t>(k_min + static_cast<int>(bi)));
    write_pod(out, static_cast<std::int32_t>(band.rows()));
    // row-major values
    for (long r = 0; r < band.rows(); ++r)
      out.write(reinterpret_cast<const char*>(Eigen::RowVectorXd(band.row(r)).data()),
                sizeof(double) * band.cols());
  }
  if (!out) throw std::runtime_error("write_band_cache: write failed for " + path);
}

std::optional<BandCache> read_band_cache(const std::string& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_band_cache: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("read_band_cache: bad magic in " + path);
  if (read_pod<std::uint32_t>(in) != kVersion)
    throw std::runtime_error("read_band_cache: unsupported version in " + path);
  BandCache cache;
  auto n_bands = read_pod<std::int32_t>(in);
  auto n_dof = read_pod<std::int32_t>(in);
  cache.k_min = read_pod<std::int32_t>(in);
  cache.dt = read_pod<double>(in);
  if (n_bands < 0 || n_dof < 0) throw std::runtime_error("read_band_cache: bad header");
  cache.bands.reserve(n_bands);
  for (int bi = 0; bi < n_bands; ++bi) {
    auto k = read_pod<std::int32_t>(in);
    auto rows = read_pod<std::int32_t>(in);
    if (k != cache.k_min + bi || rows != n_dof)
      throw std::runtime_error("read_band_cache: inconsistent band record");
    Eigen::MatrixXd band(n_dof, n_dof);
    std::vector<double> row(n_dof);
    for (int r = 0; r < n_dof; ++r) {
      in.read(reinterpret_cast<char*>(row.data()), sizeof(double) * n_dof);
      for (int c = 0; c < n_dof; ++c) band(r, c) = row[c];
    }
    cache.bands.push_back(std::move(band));
  }
  if (!in) throw std::runtime_error("read_band_cache: truncated file " + path);
  return cache;
}

std::string cache_key(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace tdbem
