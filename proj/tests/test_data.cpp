#include "doctest.h"
#include "otda/data.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace otda;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("otda_io_test_" + std::to_string(counter++) + ".csv");
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path, ec);
  }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("moon draws are seed-deterministic and balanced") {
  TwoMoonsSpec spec;
  spec.n_per_class = 25;
  spec.rotation_degrees = 30.0;
  spec.seed = 9;
  const TwoMoonsData a = two_moons(spec);
  const TwoMoonsData b = two_moons(spec);
  CHECK((a.source.X.array() == b.source.X.array()).all());
  CHECK((a.target.X.array() == b.target.X.array()).all());
  CHECK((a.test.X.array() == b.test.X.array()).all());

  CHECK(a.source.size() == 50);
  CHECK(a.target.size() == 50);
  CHECK(a.test.size() == 1000);
  CHECK(a.source.dim() == 2);
  for (Index i = 0; i < 25; ++i) {
    CHECK(a.source.y[static_cast<size_t>(i)] == 0);
    CHECK(a.source.y[static_cast<size_t>(i) + 25] == 1);
  }
  for (Index i = 0; i < 500; ++i) {
    CHECK(a.test.y[static_cast<size_t>(i)] == 0);
    CHECK(a.test.y[static_cast<size_t>(i) + 500] == 1);
  }

  TwoMoonsSpec other = spec;
  other.seed = 10;
  const TwoMoonsData c = two_moons(other);
  CHECK_FALSE((a.source.X.array() == c.source.X.array()).all());
}

TEST_CASE("noiseless class-0 moon sits on the unit circle") {
  TwoMoonsSpec spec;
  spec.n_per_class = 40;
  spec.noise_std = 0.0;
  const TwoMoonsData d = two_moons(spec);
  for (Index i = 0; i < 40; ++i) {
    const double r = d.source.X.row(i).norm();
    CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.source.X(i, 1) >= -1e-12);  // upper half arc
  }
  // class 1 is the flipped arc offset by (1, -0.5)
  for (Index i = 40; i < 80; ++i) {
    const double x = 1.0 - d.source.X(i, 0);
    const double y = 0.5 - d.source.X(i, 1);
    CHECK(std::hypot(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rotation turns the drawn points about the fixed pivot") {
  TwoMoonsSpec base;
  base.n_per_class = 15;
  base.seed = 4;
  TwoMoonsSpec turned = base;
  turned.rotation_degrees = 90.0;
  const TwoMoonsData d0 = two_moons(base);
  const TwoMoonsData d90 = two_moons(turned);

  // the rotation angle does not touch the random stream
  CHECK((d0.source.X.array() == d90.source.X.array()).all());

  const double cx = 0.5, cy = 0.25;
  for (Index i = 0; i < d0.target.size(); ++i) {
    const double dx = d0.target.X(i, 0) - cx;
    const double dy = d0.target.X(i, 1) - cy;
    // 90 degrees: (dx, dy) -> (-dy, dx)
    CHECK(d90.target.X(i, 0) == doctest::Approx(cx - dy).epsilon(1e-12));
    CHECK(d90.target.X(i, 1) == doctest::Approx(cy + dx).epsilon(1e-12));
  }
}

TEST_CASE("clean moons are perfectly 1-NN separable") {
  TwoMoonsSpec spec;
  spec.n_per_class = 20;
  spec.noise_std = 0.0;
  const TwoMoonsData d = two_moons(spec);
  const auto pred = knn_predict(d.source.X, d.source.y, d.test.X, 1);
  CHECK(evaluate(pred, d.test.y).accuracy == 1.0);
}

TEST_CASE("moon spec validation") {
  TwoMoonsSpec spec;
  spec.n_per_class = 0;
  CHECK_THROWS_WITH_AS(two_moons(spec), "invalid data", Error);
  spec.n_per_class = 5;
  spec.noise_std = -0.5;
  CHECK_THROWS_WITH_AS(two_moons(spec), "invalid data", Error);
}

TEST_CASE("affine instances have the promised structure") {
  const AffineInstance inst = affine_instance(10, 3, 123);
  CHECK(inst.Xs.rows() == 10);
  CHECK(inst.Xs.cols() == 3);
  // A is symmetric positive definite with spectrum inside [0.5, 2]
  CHECK((inst.A - inst.A.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(inst.A);
  CHECK(eig.eigenvalues().minCoeff() >= 0.5 - 1e-9);
  CHECK(eig.eigenvalues().maxCoeff() <= 2.0 + 1e-9);
  // Xt is exactly the affine image
  const Matrix expected = (inst.Xs * inst.A).rowwise() + inst.b.transpose();
  CHECK((inst.Xt - expected).cwiseAbs().maxCoeff() == 0.0);
  // no duplicate source rows
  for (Index i = 0; i < 10; ++i)
    for (Index j = i + 1; j < 10; ++j)
      CHECK((inst.Xs.row(i) - inst.Xs.row(j)).norm() > 0.0);

  const AffineInstance again = affine_instance(10, 3, 123);
  CHECK((again.Xs.array() == inst.Xs.array()).all());
  CHECK((again.A.array() == inst.A.array()).all());

  CHECK_THROWS_WITH_AS(affine_instance(5, 2, 1, {0.0, 1.0}),
                       "spectrum must be positive", Error);
  CHECK_THROWS_WITH_AS(affine_instance(5, 2, 1, {2.0, 0.5}),
                       "spectrum must be positive", Error);
  CHECK_THROWS_WITH_AS(affine_instance(0, 2, 1), "invalid data", Error);
}

TEST_CASE("labeled loader parses delimiters, labels, and headers") {
  TempFile comma("0.5,1.5,A\n2.5,3.5,B\n4.5,5.5,A\n");
  const LabeledDataset d = load_labeled(comma.str());
  REQUIRE(d.size() == 3);
  CHECK(d.dim() == 2);
  CHECK(d.X(0, 0) == 0.5);
  CHECK(d.X(2, 1) == 5.5);
  CHECK(d.y == std::vector<int>{0, 1, 0});
  CHECK(d.class_names == std::vector<std::string>{"A", "B"});

  TempFile tabs("1\t2\tpos\n3\t4\tneg\n");
  const LabeledDataset t = load_labeled(tabs.str());
  CHECK(t.dim() == 2);
  CHECK(t.class_names == std::vector<std::string>{"pos", "neg"});

  TempFile with_header("x,y,label\n1,2,A\n3,4,B\n");
  const LabeledDataset h = load_labeled(with_header.str(), true);
  CHECK(h.size() == 2);

  TempFile crlf("1,2,A\r\n3,4,B\r\n");
  const LabeledDataset c = load_labeled(crlf.str());
  CHECK(c.size() == 2);
  CHECK(c.class_names == std::vector<std::string>{"A", "B"});

  // labels intern in first-appearance order, not sorted
  TempFile swapped("5,B\n6,A\n7,B\n");
  const LabeledDataset s = load_labeled(swapped.str());
  CHECK(s.class_names == std::vector<std::string>{"B", "A"});
  CHECK(s.y == std::vector<int>{0, 1, 0});
}

TEST_CASE("loader failures carry real line numbers") {
  TempFile ragged("1,2,A\n\n3,4\n");  // blank line, then a short row 3
  CHECK_THROWS_WITH_AS(load_labeled(ragged.str()), "ragged row at line 3",
                       Error);

  TempFile bad_value("1,2,A\n3,oops,B\n");
  CHECK_THROWS_WITH_AS(load_labeled(bad_value.str()),
                       "non-numeric value at line 2", Error);

  TempFile non_finite("1,inf,A\n");
  CHECK_THROWS_WITH_AS(load_labeled(non_finite.str()),
                       "non-finite value at line 1", Error);

  TempFile no_label("1.5\n2.5\n");
  CHECK_THROWS_WITH_AS(load_labeled(no_label.str()),
                       "missing label column at line 1", Error);

  TempFile empty("");
  CHECK_THROWS_WITH_AS(load_labeled(empty.str()), "no samples", Error);

  TempFile header_only("a,b,c\n");
  CHECK_THROWS_WITH_AS(load_labeled(header_only.str(), true), "no samples",
                       Error);

  CHECK_THROWS_AS(load_labeled("/nonexistent/otda/file.csv"), Error);
}

TEST_CASE("matrix save and load round-trips exactly") {
  Matrix m(3, 2);
  m << 0.1, -2.5e-17, 3.14159265358979312, 1e300, -7, 0;
  TempFile placeholder("");
  save_matrix(placeholder.str(), m);
  const Matrix back = load_matrix(placeholder.str());
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 2);
  CHECK((back.array() == m.array()).all());

  TempFile plain("1,2\n3,4\n");
  const Matrix p = load_matrix(plain.str());
  CHECK(p(1, 1) == 4.0);
}
