#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace tdbem {

/// Binary band-cache file: a version header followed by one record per band
/// (band index, n_dof, row-major values), so solver experiments can rerun
/// without reassembly.
void write_band_cache(const std::string& path, const std::vector<Eigen::MatrixXd>& bands,
                      int k_min, double dt);

struct BandCache {
  std::vector<Eigen::MatrixXd> bands;
  int k_min = -1;
  double dt = 0.0;
};

/// Returns nullopt when the file does not exist; throws on malformed files.
std::optional<BandCache> read_band_cache(const std::string& path);

/// FNV-1a hash of a canonical parameter string, used to key cache files.
std::string cache_key(const std::string& canonical);

}  // namespace tdbem
