#include "otda/data.hpp"

#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace otda {

namespace {

// One two-moons draw in canonical pose. Per sample: arc position, then
// one noise value per coordinate, all from the shared engine.
LabeledDataset draw_moons(Index n_per_class, double noise_std,
                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> arc(0.0, std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);
  LabeledDataset out;
  out.X.resize(2 * n_per_class, 2);
  out.y.resize(2 * n_per_class);
  out.class_names = {"0", "1"};
  for (int cls = 0; cls < 2; ++cls)
    for (Index i = 0; i < n_per_class; ++i) {
      const double t = arc(rng);
      double x = std::cos(t), y = std::sin(t);
      if (cls == 1) {  // second moon, flipped and offset by (1, -0.5)
        x = 1.0 - x;
        y = 0.5 - y;
      }
      const Index row = cls * n_per_class + i;
      out.X(row, 0) = x + noise_std * noise(rng);
      out.X(row, 1) = y + noise_std * noise(rng);
      out.y[row] = cls;
    }
  return out;
}

void rotate_in_place(Matrix& X, double degrees) {
  // centroid of the noiseless joint distribution; using a fixed pivot
  // keeps target and test draws identically distributed
  const double cx = 0.5, cy = 0.25;
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  for (Index i = 0; i < X.rows(); ++i) {
    const double dx = X(i, 0) - cx, dy = X(i, 1) - cy;
    X(i, 0) = cx + c * dx - s * dy;
    X(i, 1) = cy + s * dx + c * dy;
  }
}

[[noreturn]] void fail_line(const std::string& what, size_t line) {
  throw Error(what + " at line " + std::to_string(line));
}

std::vector<std::string> split_fields(const std::string& line) {
  const char delim = line.find(',') != std::string::npos ? ',' : '\t';
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) fields.push_back(field);
  if (!line.empty() && line.back() == delim) fields.push_back("");
  return fields;
}

double parse_value(const std::string& field, size_t line) {
  try {
    size_t used = 0;
    const double v = std::stod(field, &used);
    while (used < field.size() &&
           std::isspace(static_cast<unsigned char>(field[used])))
      ++used;
    if (used != field.size()) fail_line("non-numeric value", line);
    if (!std::isfinite(v)) fail_line("non-finite value", line);
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail_line("non-numeric value", line);
  }
}

// Reads all rows as (line number, string fields), enforcing a
// rectangular shape.
using RawRows = std::vector<std::pair<size_t, std::vector<std::string>>>;

RawRows read_rows(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  RawRows rows;
  std::string line;
  size_t lineno = 0;
  size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && header) continue;
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (width == 0)
      width = fields.size();
    else if (fields.size() != width)
      fail_line("ragged row", lineno);
    rows.emplace_back(lineno, std::move(fields));
  }
  if (rows.empty()) throw Error("no samples");
  return rows;
}

}  // namespace

TwoMoonsData two_moons(const TwoMoonsSpec& spec) {
  if (spec.n_per_class < 1) throw Error("invalid data");
  if (spec.noise_std < 0.0) throw Error("invalid data");
  std::mt19937_64 rng(spec.seed);
  TwoMoonsData out;
  out.source = draw_moons(spec.n_per_class, spec.noise_std, rng);
  out.target = draw_moons(spec.n_per_class, spec.noise_std, rng);
  out.test = draw_moons(500, spec.noise_std, rng);
  rotate_in_place(out.target.X, spec.rotation_degrees);
  rotate_in_place(out.test.X, spec.rotation_degrees);
  return out;
}

AffineInstance affine_instance(Index n, Index d, std::uint64_t seed,
                               std::pair<double, double> spd_spectrum) {
  if (n < 1 || d < 1) throw Error("invalid data");
  if (!(spd_spectrum.first > 0.0) || !(spd_spectrum.second > 0.0) ||
      spd_spectrum.second < spd_spectrum.first)
    throw Error("spectrum must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  AffineInstance out;
  out.Xs.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    bool fresh = false;
    while (!fresh) {
      for (Index c = 0; c < d; ++c) out.Xs(i, c) = gauss(rng);
      fresh = true;
      for (Index p = 0; p < i && fresh; ++p)
        if ((out.Xs.row(p).array() == out.Xs.row(i).array()).all())
          fresh = false;
    }
  }

  Matrix G(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) G(i, j) = gauss(rng);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
  std::uniform_real_distribution<double> eig(spd_spectrum.first,
                                             spd_spectrum.second);
  Vector spectrum(d);
  for (Index i = 0; i < d; ++i) spectrum[i] = eig(rng);
  out.A = Q.transpose() * spectrum.asDiagonal() * Q;

  out.b.resize(d);
  for (Index i = 0; i < d; ++i) out.b[i] = gauss(rng);
  out.Xt = (out.Xs * out.A).rowwise() + out.b.transpose();
  return out;
}

LabeledDataset load_labeled(const std::string& path, bool header) {
  const auto rows = read_rows(path, header);
  if (rows.front().second.size() < 2)
    fail_line("missing label column", rows.front().first);
  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(rows.front().second.size()) - 1;
  LabeledDataset out;
  out.X.resize(n, d);
  out.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& [lineno, fields] = rows[i];
    for (Index c = 0; c < d; ++c) out.X(i, c) = parse_value(fields[c], lineno);
    const std::string& label = fields.back();
    int id = -1;
    for (size_t k = 0; k < out.class_names.size(); ++k)
      if (out.class_names[k] == label) {
        id = static_cast<int>(k);
        break;
      }
    if (id < 0) {
      id = static_cast<int>(out.class_names.size());
      out.class_names.push_back(label);
    }
    out.y[i] = id;
  }
  return out;
}

Matrix load_matrix(const std::string& path, bool header) {
  const auto rows = read_rows(path, header);
  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(rows.front().second.size());
  Matrix out(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& [lineno, fields] = rows[i];
    for (Index c = 0; c < d; ++c) out(i, c) = parse_value(fields[c], lineno);
  }
  return out;
}

void save_matrix(const std::string& path, const Matrix& m) {
  std::ofstream outf(path);
  if (!outf) throw Error("cannot open file: " + path);
  outf.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) outf << ',';
      outf << m(i, j);
    }
    outf << '\n';
  }
  if (!outf) throw Error("cannot write file: " + path);
}

}  // namespace otda
