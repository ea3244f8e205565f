#pragma once

// Helpers shared by the test binaries: random inputs and independent oracles
// written without the library code they check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "eagc/numerics.hpp"

namespace eagc::testing {

inline Matrix random_matrix(SeededRng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  return gaussian(rng, 0.0, scale, rows, cols);
}

inline Matrix random_symmetric(SeededRng& rng, Eigen::Index n) {
  const Matrix a = random_matrix(rng, n, n);
  return 0.5 * (a + a.transpose());
}

inline Matrix random_spd(SeededRng& rng, Eigen::Index n, double shift = 0.5) {
  const Matrix a = random_matrix(rng, n, n);
  return a * a.transpose() / static_cast<double>(n) + shift * Matrix::Identity(n, n);
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

/// Accuracy over the best cluster-to-class map, found by trying every
/// permutation of max(#clusters, #classes) labels. Several maps can reach
/// the best total, so every (old, new) pair reached by one is kept.
struct BruteAcc {
  double all = 0.0;
  std::vector<std::pair<double, double>> old_new;
};

inline BruteAcc brute_force_acc(const std::vector<int>& pred, const std::vector<int>& gt,
                                const std::vector<int>& known) {
  int n = 0;
  for (int p : pred) n = std::max(n, p + 1);
  for (int g : gt) n = std::max(n, g + 1);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  auto is_known = [&](int g) { return std::find(known.begin(), known.end(), g) != known.end(); };

  long best = -1;
  BruteAcc out;
  do {
    long hit = 0, hit_old = 0, hit_new = 0, n_old = 0, n_new = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool ok = perm[static_cast<std::size_t>(pred[i])] == gt[i];
      hit += ok;
      if (is_known(gt[i])) {
        ++n_old;
        hit_old += ok;
      } else {
        ++n_new;
        hit_new += ok;
      }
    }
    if (hit > best) {
      best = hit;
      out.all = static_cast<double>(hit) / static_cast<double>(pred.size());
      out.old_new.clear();
    }
    if (hit == best)
      out.old_new.emplace_back(n_old ? static_cast<double>(hit_old) / static_cast<double>(n_old) : 0.0,
                               n_new ? static_cast<double>(hit_new) / static_cast<double>(n_new) : 0.0);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

/// Plain-loop evaluation of the joint objective
///   alpha * CE(labeled) + beta * (distill(unlabeled) - ent_w * H(mean p)) + prox
/// for a linear encoder W and prototypes C, with fixed targets.
struct ObjectiveInputs {
  Matrix x;
  std::vector<bool> labeled;
  std::vector<int> labels;
  Matrix targets;
  Matrix ref_features;
  double alpha = 0.35, beta = 0.65, tau_s = 0.1, entropy_weight = 1.0, prox = 0.0;
};

inline double loop_objective(const ObjectiveInputs& in, const Matrix& W, const Matrix& C) {
  const long m = in.x.rows(), d = W.cols(), k = C.rows();
  std::vector<std::vector<double>> logits(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(k)));
  std::vector<std::vector<double>> z(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(d)));
  for (long i = 0; i < m; ++i) {
    double nrm = 0.0;
    for (long j = 0; j < d; ++j) {
      double s = 0.0;
      for (long t = 0; t < in.x.cols(); ++t) s += in.x(i, t) * W(t, j);
      z[i][j] = s;
      nrm += s * s;
    }
    nrm = std::sqrt(nrm);
    for (long c = 0; c < k; ++c) {
      double s = 0.0;
      for (long j = 0; j < d; ++j) s += z[i][j] / nrm * C(c, j);
      logits[i][c] = s / in.tau_s;
    }
  }
  auto logsoftmax = [&](long i, long c) {
    double mx = logits[i][0];
    for (double v : logits[i]) mx = std::max(mx, v);
    double s = 0.0;
    for (double v : logits[i]) s += std::exp(v - mx);
    return logits[i][c] - mx - std::log(s);
  };

  double sup = 0.0, distill = 0.0, prox = 0.0;
  long nl = 0, nu = 0;
  std::vector<double> mean_p(static_cast<std::size_t>(k), 0.0);
  for (long i = 0; i < m; ++i) {
    if (in.labeled[i]) {
      ++nl;
      sup -= logsoftmax(i, in.labels[i]);
      for (long j = 0; j < d; ++j) {
        const double diff = z[i][j] - in.ref_features(i, j);
        prox += 0.5 * in.prox * diff * diff;
      }
    } else {
      ++nu;
      for (long c = 0; c < k; ++c) {
        distill -= in.targets(i, c) * logsoftmax(i, c);
        mean_p[c] += std::exp(logsoftmax(i, c));
      }
    }
  }
  double total = prox;
  if (nl) total += in.alpha * sup / static_cast<double>(nl);
  if (nu) {
    double h = 0.0;
    for (double& p : mean_p) {
      p /= static_cast<double>(nu);
      h -= p * std::log(p);
    }
    total += in.beta * (distill / static_cast<double>(nu) - in.entropy_weight * h);
  }
  return total;
}

}  // namespace eagc::testing
