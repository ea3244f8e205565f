#include "eagc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "eagc/errors.hpp"
#include "eagc/hungarian.hpp"

namespace eagc {

double gdc(const Vector& reference_grad, const Vector& joint_grad) {
  if (reference_grad.size() != joint_grad.size()) throw ArgumentError("gdc: gradient lengths differ");
  const double nr = reference_grad.norm();
  const double nj = joint_grad.norm();
  if (!(nr > 0.0) || !(nj > 0.0)) throw DegenerateInputError("gdc: zero-norm gradient");
  const double cosine = reference_grad.dot(joint_grad) / (nr * nj);
  return std::clamp(1.0 - cosine, 0.0, 2.0);
}

double soc(const Matrix& features, const Matrix& P) {
  if (features.cols() != P.rows() || P.rows() != P.cols()) throw ArgumentError("soc: dimension mismatch");
  const double total = features.squaredNorm();
  if (!(total > 0.0)) throw DegenerateInputError("soc: zero feature matrix");
  return std::clamp((features * P).squaredNorm() / total, 0.0, 1.0);
}

double rho_grad(const Vector& per_class_norms, const std::vector<bool>& known) {
  if (static_cast<std::size_t>(per_class_norms.size()) != known.size())
    throw ArgumentError("rho_grad: norms and flags differ in length");
  if ((per_class_norms.array() < 0.0).any()) throw ArgumentError("rho_grad: negative norm");
  const double total = per_class_norms.sum();
  if (!(total > 0.0)) throw DegenerateInputError("rho_grad: all class norms are zero");
  double known_sum = 0.0;
  for (Eigen::Index k = 0; k < per_class_norms.size(); ++k)
    if (known[static_cast<std::size_t>(k)]) known_sum += per_class_norms(k);
  return known_sum / total;
}

AccTriple hungarian_acc(std::span<const int> pred, std::span<const int> gt, std::span<const int> known_classes) {
  if (pred.empty()) throw ArgumentError("hungarian_acc: empty input");
  if (pred.size() != gt.size()) throw ArgumentError("hungarian_acc: prediction and label lengths differ");

  // Compact arbitrary ids to 0..n-1 in ascending order.
  std::map<int, int> cluster_index, class_index;
  for (int c : pred) cluster_index.emplace(c, 0);
  for (int c : gt) class_index.emplace(c, 0);
  int next = 0;
  for (auto& [id, idx] : cluster_index) idx = next++;
  next = 0;
  for (auto& [id, idx] : class_index) idx = next++;

  const int n = static_cast<int>(std::max(cluster_index.size(), class_index.size()));
  std::vector<double> counts(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t s = 0; s < pred.size(); ++s)
    counts[static_cast<std::size_t>(cluster_index[pred[s]]) * n + class_index[gt[s]]] += 1.0;

  std::vector<double> cost(counts.size());
  std::transform(counts.begin(), counts.end(), cost.begin(), [](double c) { return -c; });
  const std::vector<int> class_for_cluster = solve_assignment(cost, n);

  std::vector<bool> is_known(static_cast<std::size_t>(n), false);
  for (int id : known_classes) {
    auto it = class_index.find(id);
    if (it != class_index.end()) is_known[static_cast<std::size_t>(it->second)] = true;
  }

  std::vector<int> cluster_for_class(static_cast<std::size_t>(n), -1);
  for (int r = 0; r < n; ++r) cluster_for_class[static_cast<std::size_t>(class_for_cluster[r])] = r;

  double hit_all = 0.0, hit_old = 0.0, hit_new = 0.0;
  double n_old = 0.0, n_new = 0.0;
  for (const auto& [id, cls] : class_index) {
    double class_total = 0.0;
    for (int r = 0; r < n; ++r) class_total += counts[static_cast<std::size_t>(r) * n + cls];
    const double hits = counts[static_cast<std::size_t>(cluster_for_class[cls]) * n + cls];
    hit_all += hits;
    if (is_known[static_cast<std::size_t>(cls)]) {
      hit_old += hits;
      n_old += class_total;
    } else {
      hit_new += hits;
      n_new += class_total;
    }
  }

  AccTriple acc;
  acc.all = hit_all / static_cast<double>(pred.size());
  acc.old = n_old > 0.0 ? hit_old / n_old : 0.0;
  acc.new_ = n_new > 0.0 ? hit_new / n_new : 0.0;
  return acc;
}

}  // namespace eagc
