#include "eagc/dataset.hpp"

#include <fstream>
#include <sstream>

#include "eagc/errors.hpp"
#include "eagc/matrix_io.hpp"

namespace eagc {

Matrix DatasetSplit::novel_x() const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < unlabeled_known.size(); ++i)
    if (!unlabeled_known[i]) rows.push_back(static_cast<Eigen::Index>(i));
  return unlabeled_x(rows, Eigen::all);
}

std::vector<int> DatasetSplit::known_class_ids() const {
  std::vector<int> ids(static_cast<std::size_t>(num_known));
  for (int k = 0; k < num_known; ++k) ids[static_cast<std::size_t>(k)] = k;
  return ids;
}

DatasetSplit gen_synthetic(const SyntheticSpec& spec) {
  if (spec.input_dim < 2) throw ArgumentError("gen_synthetic: input dimension must be >= 2");
  if (spec.num_known < 1 || spec.num_novel < 0 || spec.per_class < 1)
    throw ArgumentError("gen_synthetic: class and sample counts must be positive");
  if (!(spec.class_sep > 0.0)) throw ArgumentError("gen_synthetic: class_sep must be positive");
  if (!(spec.noise_std >= 0.0)) throw ArgumentError("gen_synthetic: noise_std must be non-negative");

  SeededRng rng(spec.seed);
  const int total = spec.num_known + spec.num_novel;
  const int labeled_per_class = spec.per_class / 2;
  const int d = spec.input_dim;

  Matrix means(total, d);
  for (int c = 0; c < total; ++c) {
    Vector dir;
    do {
      dir = gaussian(rng, 0.0, 1.0, d, 1).col(0);
    } while (dir.norm() == 0.0);
    means.row(c) = spec.class_sep * dir.normalized().transpose();
  }

  DatasetSplit out;
  out.num_known = spec.num_known;
  out.num_total = total;
  const int n_labeled = spec.num_known * labeled_per_class;
  const int n_unlabeled = total * spec.per_class - n_labeled;
  out.labeled_x.resize(n_labeled, d);
  out.unlabeled_x.resize(n_unlabeled, d);

  Eigen::Index li = 0, ui = 0;
  for (int c = 0; c < total; ++c) {
    const bool known = c < spec.num_known;
    const Matrix noise = gaussian(rng, 0.0, spec.noise_std, spec.per_class, d);
    for (int s = 0; s < spec.per_class; ++s) {
      const auto row = means.row(c) + noise.row(s);
      if (known && s < labeled_per_class) {
        out.labeled_x.row(li++) = row;
        out.labeled_y.push_back(c);
      } else {
        out.unlabeled_x.row(ui++) = row;
        out.unlabeled_y.push_back(c);
        out.unlabeled_known.push_back(known);
      }
    }
  }
  return out;
}

void write_dataset(std::ostream& out, const DatasetSplit& data) {
  const Eigen::Index n = data.labeled_count() + data.unlabeled_count();
  out << n << ' ' << data.input_dim() << ' ' << data.num_known << ' ' << data.num_total << '\n';
  auto write_row = [&](int label, char split, bool known, const auto& row) {
    out << label << ' ' << split << ' ' << (known ? 1 : 0);
    for (Eigen::Index j = 0; j < row.size(); ++j) out << ' ' << format_real(row(j));
    out << '\n';
  };
  for (Eigen::Index i = 0; i < data.labeled_count(); ++i)
    write_row(data.labeled_y[static_cast<std::size_t>(i)], 'L', true, data.labeled_x.row(i));
  for (Eigen::Index i = 0; i < data.unlabeled_count(); ++i)
    write_row(data.unlabeled_y[static_cast<std::size_t>(i)], 'U', data.unlabeled_known[static_cast<std::size_t>(i)],
              data.unlabeled_x.row(i));
}

DatasetSplit read_dataset(std::istream& in) {
  long n = 0, d = 0;
  DatasetSplit out;
  std::string header;
  if (!std::getline(in, header)) throw DataError("dataset: missing header");
  {
    std::istringstream hs(header);
    if (!(hs >> n >> d >> out.num_known >> out.num_total) || n < 0 || d < 1 || out.num_known < 0 ||
        out.num_total < out.num_known)
      throw DataError("dataset: malformed header '" + header + "'");
  }

  std::vector<std::vector<double>> lab, unl;
  std::string line;
  long seen = 0;
  while (seen < n && std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int label = 0, known = 0;
    std::string split;
    if (!(ls >> label >> split >> known) || (split != "L" && split != "U") || (known != 0 && known != 1))
      throw DataError("dataset: malformed sample line " + std::to_string(seen + 2));
    if (label < 0 || label >= out.num_total) throw DataError("dataset: label out of range on line " + std::to_string(seen + 2));
    std::vector<double> f(static_cast<std::size_t>(d));
    for (auto& v : f)
      if (!(ls >> v)) throw DataError("dataset: too few features on line " + std::to_string(seen + 2));
    double extra = 0.0;
    if (ls >> extra) throw DataError("dataset: too many features on line " + std::to_string(seen + 2));
    if (split == "L") {
      if (label >= out.num_known || known != 1) throw DataError("dataset: labeled sample must belong to a known class");
      lab.push_back(std::move(f));
      out.labeled_y.push_back(label);
    } else {
      if ((label < out.num_known) != (known == 1)) throw DataError("dataset: is_known flag disagrees with label");
      unl.push_back(std::move(f));
      out.unlabeled_y.push_back(label);
      out.unlabeled_known.push_back(known == 1);
    }
    ++seen;
  }
  if (seen != n) throw DataError("dataset: expected " + std::to_string(n) + " samples, found " + std::to_string(seen));

  auto to_matrix = [d](const std::vector<std::vector<double>>& rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (long j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    return m;
  };
  out.labeled_x = to_matrix(lab);
  out.unlabeled_x = to_matrix(unl);
  if (!out.labeled_x.allFinite() || !out.unlabeled_x.allFinite()) throw DataError("dataset: non-finite features");
  return out;
}

void save_dataset(const std::string& path, const DatasetSplit& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_dataset(out, data);
  if (!out) throw DataError("failed writing '" + path + "'");
}

DatasetSplit load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return read_dataset(in);
}

}  // namespace eagc
