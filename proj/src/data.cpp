#include "interbench/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace interbench {

void LabeledDataset::validate() const {
  if (X.rows() != y.size())
    throw std::invalid_argument("dataset: X/y length mismatch");
  if (z && z->size() != y.size())
    throw std::invalid_argument("dataset: z length mismatch");
  for (int label : y)
    if (label < 0 || label >= class_count)
      throw std::invalid_argument("dataset: label out of range");
  if (z)
    for (int g : *z)
      if (g < 0 || g >= group_count)
        throw std::invalid_argument("dataset: sensitive attribute out of range");
  if (grid && grid->first * grid->second != X.cols())
    throw std::invalid_argument("dataset: grid does not match feature dim");
  if (!X.all_finite()) throw std::invalid_argument("dataset: non-finite features");
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& idx) const {
  LabeledDataset out;
  const std::size_t d = X.cols();
  out.X = Tensor({idx.size(), d});
  out.y.resize(idx.size());
  if (z) out.z = std::vector<int>(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy(X.row(idx[i]), X.row(idx[i]) + d, out.X.row(i));
    out.y[i] = y[idx[i]];
    if (z) (*out.z)[i] = (*z)[idx[i]];
  }
  out.grid = grid;
  out.class_count = class_count;
  out.group_count = group_count;
  out.normalized = normalized;
  out.name = name;
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
      cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

double parse_cell(const std::string& s, std::size_t row, const std::string& col) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("load_csv: non-numeric cell '" + s + "' in column " +
                             col + ", row " + std::to_string(row));
  }
}

}  // namespace

LabeledDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
  auto header = split_line(line);

  std::ptrdiff_t label_col = -1, sens_col = -1;
  std::vector<std::size_t> feature_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& h = header[i];
    if (h == schema.label_column) {
      label_col = static_cast<std::ptrdiff_t>(i);
    } else if (h.rfind("sens_", 0) == 0) {
      const bool chosen =
          schema.sensitive_column.empty() ? sens_col < 0 : h == schema.sensitive_column;
      if (chosen) sens_col = static_cast<std::ptrdiff_t>(i);
      if (schema.sensitive_as_feature) feature_cols.push_back(i);
    } else {
      feature_cols.push_back(i);
    }
  }
  if (label_col < 0)
    throw std::runtime_error("load_csv: missing label column '" + schema.label_column + "'");
  if (!schema.sensitive_column.empty() && sens_col < 0)
    throw std::runtime_error("load_csv: missing sensitive column '" +
                             schema.sensitive_column + "'");

  std::vector<double> flat;
  std::vector<int> labels, sens;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("load_csv: row " + std::to_string(row) +
                               " has wrong column count");
    for (std::size_t c : feature_cols) flat.push_back(parse_cell(cells[c], row, header[c]));
    labels.push_back(static_cast<int>(
        parse_cell(cells[static_cast<std::size_t>(label_col)], row, header[static_cast<std::size_t>(label_col)])));
    if (sens_col >= 0)
      sens.push_back(static_cast<int>(
          parse_cell(cells[static_cast<std::size_t>(sens_col)], row, header[static_cast<std::size_t>(sens_col)])));
    ++row;
  }
  if (labels.empty()) throw std::runtime_error("load_csv: no data rows in " + path);

  LabeledDataset ds;
  ds.X = Tensor({labels.size(), feature_cols.size()}, std::move(flat));
  ds.y = std::move(labels);
  ds.class_count = *std::max_element(ds.y.begin(), ds.y.end()) + 1;
  if (sens_col >= 0) {
    ds.z = std::move(sens);
    ds.group_count = *std::max_element(ds.z->begin(), ds.z->end()) + 1;
  }
  ds.name = path;

  // Sidecar metadata: {"grid": [H, W], "normalized": bool}
  std::ifstream meta(path + ".meta.json");
  if (meta) {
    nlohmann::json j = nlohmann::json::parse(meta);
    if (j.contains("grid"))
      ds.grid = {j["grid"][0].get<std::size_t>(), j["grid"][1].get<std::size_t>()};
    if (j.contains("normalized")) ds.normalized = j["normalized"].get<bool>();
  }

  if (schema.normalize) {
    LabeledDataset norm = normalize_minmax(ds);
    norm.validate();
    return norm;
  }
  ds.validate();
  return ds;
}

LabeledDataset normalize_minmax(const LabeledDataset& ds) {
  LabeledDataset out = ds;
  const std::size_t n = ds.size(), d = ds.dim();
  for (std::size_t j = 0; j < d; ++j) {
    double lo = ds.X.at(0, j), hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, ds.X.at(i, j));
      hi = std::max(hi, ds.X.at(i, j));
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
      // constant columns map to 0
      out.X.at(i, j) = range > 0.0 ? (ds.X.at(i, j) - lo) / range : 0.0;
    }
  }
  out.normalized = true;
  return out;
}

Splits split(const LabeledDataset& ds, const SplitSpec& spec) {
  const double sum =
      spec.train_fraction + spec.test_fraction + spec.adversary_fraction;
  if (spec.train_fraction < 0 || spec.test_fraction < 0 || spec.adversary_fraction < 0)
    throw std::invalid_argument("split: fractions must be nonnegative");
  if (sum > 1.0 + 1e-12) throw std::invalid_argument("split: fractions sum > 1");
  const std::size_t n = ds.size();
  auto round_sz = [n](double f) {
    return static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
  };
  std::size_t n_tr = round_sz(spec.train_fraction);
  std::size_t n_te = round_sz(spec.test_fraction);
  std::size_t n_adv = round_sz(spec.adversary_fraction);
  if (n_tr + n_te + n_adv > n) n_adv = n - n_tr - n_te;

  Rng rng = Rng(spec.seed).substream("split");
  auto perm = rng.permutation(n);
  Splits s;
  s.train_idx.assign(perm.begin(), perm.begin() + n_tr);
  s.test_idx.assign(perm.begin() + n_tr, perm.begin() + n_tr + n_te);
  s.adversary_idx.assign(perm.begin() + n_tr + n_te, perm.begin() + n_tr + n_te + n_adv);
  s.train = ds.subset(s.train_idx);
  s.test = ds.subset(s.test_idx);
  s.adversary = ds.subset(s.adversary_idx);
  return s;
}

LabeledDataset synth_gauss(const SyntheticSpec& spec) {
  if (spec.ratio < 0.0 || spec.ratio > 1.0)
    throw std::invalid_argument("synth_gauss: ratio must be in [0,1]");
  if (spec.rho < -1.0 || spec.rho > 1.0)
    throw std::invalid_argument("synth_gauss: rho must be in [-1,1]");
  if (spec.label_noise < 0.0 || spec.label_noise >= 0.5)
    throw std::invalid_argument("synth_gauss: label_noise must be in [0, 0.5)");
  if (spec.n == 0 || spec.d == 0)
    throw std::invalid_argument("synth_gauss: n and d must be positive");
  const double r = spec.ratio;
  const double dev = spec.rho * std::sqrt(r * (1.0 - r));
  const double p1 = r + dev;  // P(z=1 | y=1)
  const double p0 = r - dev;  // P(z=1 | y=0)
  if (p1 < -1e-12 || p1 > 1.0 + 1e-12 || p0 < -1e-12 || p0 > 1.0 + 1e-12)
    throw std::invalid_argument("synth_gauss: infeasible (ratio, rho) pair");

  Rng rng = Rng(spec.seed).substream("synth_gauss");
  LabeledDataset ds;
  ds.X = Tensor({spec.n, spec.d});
  ds.y.resize(spec.n);
  ds.z = std::vector<int>(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    int y = rng.bernoulli(0.5) ? 1 : 0;
    int z = rng.bernoulli(y == 1 ? p1 : p0) ? 1 : 0;
    double* x = ds.X.row(i);
    for (std::size_t j = 0; j < spec.d; ++j) x[j] = rng.normal() * spec.cov_scale;
    x[0] += (y == 1 ? 0.5 : -0.5) * spec.mean_separation;
    if (spec.d > 1 && z == 1) x[1] += spec.sensitive_shift;
    if (spec.label_noise > 0.0 && rng.bernoulli(spec.label_noise)) y = 1 - y;
    ds.y[i] = y;
    (*ds.z)[i] = z;
  }
  ds.class_count = 2;
  ds.group_count = 2;
  ds.grid = spec.grid;
  ds.name = "synth_gauss";
  ds.validate();
  return ds;
}

double empirical_correlation(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  if (n == 0 || b.size() != n)
    throw std::invalid_argument("correlation: size mismatch");
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace interbench
