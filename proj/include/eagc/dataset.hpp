#pragma once

// Synthetic GCD data: Gaussian class blobs, half of every known class
// labeled, the rest of the known classes plus all novel classes unlabeled.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eagc/numerics.hpp"

namespace eagc {

struct DatasetSplit {
  Matrix labeled_x;
  std::vector<int> labeled_y;
  Matrix unlabeled_x;
  std::vector<int> unlabeled_y;  // evaluation only
  std::vector<bool> unlabeled_known;
  int num_known = 0;
  int num_total = 0;

  Eigen::Index input_dim() const { return labeled_x.cols(); }
  Eigen::Index labeled_count() const { return labeled_x.rows(); }
  Eigen::Index unlabeled_count() const { return unlabeled_x.rows(); }

  /// Unlabeled rows whose hidden class is novel.
  Matrix novel_x() const;
  std::vector<int> known_class_ids() const;
};

struct SyntheticSpec {
  int num_known = 4;
  int num_novel = 4;
  int per_class = 50;
  int input_dim = 32;
  double class_sep = 0.5;
  double noise_std = 0.05;
  std::uint64_t seed = 0;
};

/// Class means are uniform on the sphere of radius class_sep. Known classes
/// contribute their first per_class/2 samples to the labeled set.
DatasetSplit gen_synthetic(const SyntheticSpec& spec);

/// Text format: header `N d_in num_known num_total`, then one line per
/// sample `label L|U is_known f_1 ... f_d`. Labeled rows come first.
void write_dataset(std::ostream& out, const DatasetSplit& data);
DatasetSplit read_dataset(std::istream& in);

void save_dataset(const std::string& path, const DatasetSplit& data);
DatasetSplit load_dataset(const std::string& path);

}  // namespace eagc
