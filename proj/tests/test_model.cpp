#include <cmath>

#include "doctest.h"
#include "hypobridge/model.hpp"
#include "hypobridge/rng.hpp"
#include "test_util.hpp"

using namespace hypobridge;
using hbtest::max_abs;
using hbtest::random_matrix;

namespace {

Matrix planar_drift() {
  Matrix a(2, 2);
  a << 0, 0, 1, 0;
  return a;
}

Vector e1(Index d) {
  Vector b = Vector::Zero(d);
  b(0) = 1.0;
  return b;
}

Matrix shift_drift(Index d) {
  Matrix a = Matrix::Zero(d, d);
  for (Index i = 1; i < d; ++i) a(i, i - 1) = 1.0;
  return a;
}

// Random spec whose standard basis is already adapted, with a prescribed
// dimension ladder (increments non-increasing so the subdiagonal blocks can
// have full row rank).
ModelSpec random_adapted_spec(const std::vector<int>& dims, Index m,
                              GaussianStream& gs) {
  const Index d = dims.back();
  for (int attempt = 0; attempt < 100; ++attempt) {
    Matrix a = Matrix::Zero(d, d);
    const int n = static_cast<int>(dims.size());
    auto start = [&](int k) { return k >= 2 ? dims[k - 2] : 0; };
    auto len = [&](int k) { return dims[k - 1] - (k >= 2 ? dims[k - 2] : 0); };
    for (int k = 1; k <= n; ++k) {
      for (int l = k - 1; l <= n; ++l) {
        if (l < 1) continue;
        a.block(start(k), start(l), len(k), len(l)) =
            random_matrix(len(k), len(l), gs);
      }
    }
    Matrix b = Matrix::Zero(d, m);
    b.topRows(dims[0]) = random_matrix(dims[0], m, gs);
    try {
      ModelSpec spec = build_model(a, b);
      Filtration f = filtration(spec);
      if (f.dims == dims) return spec;
    } catch (const NotControllableError&) {
    }
  }
  throw std::runtime_error("random_adapted_spec: generation failed");
}

}  // namespace

TEST_CASE("build_model accepts the planar and triangular presets") {
  const ModelSpec kol = build_model(planar_drift(), e1(2));
  CHECK(kol.d() == 2);
  CHECK(kol.m() == 1);

  Matrix a43(2, 2);
  a43 << -1, 0, 1, 2;
  CHECK_NOTHROW(build_model(a43, e1(2)));
}

TEST_CASE("build_model rejects uncontrollable pairs with the achieved rank") {
  try {
    build_model(Matrix::Zero(2, 2), e1(2));
    FAIL("expected NotControllableError");
  } catch (const NotControllableError& e) {
    CHECK(e.achieved_rank() == 1);
  }
}

TEST_CASE("build_model rejects a vanishing diffusion") {
  GaussianStream gs(28, 0);
  try {
    build_model(random_matrix(3, 3, gs), Matrix::Zero(3, 1));
    FAIL("expected NotControllableError");
  } catch (const NotControllableError& e) {
    CHECK(e.achieved_rank() == 0);
  }
}

TEST_CASE("build_model rejects shape mismatches") {
  CHECK_THROWS_AS(build_model(Matrix::Zero(2, 2), Matrix::Zero(3, 1)),
                  ShapeMismatchError);
  CHECK_THROWS_AS(build_model(Matrix::Zero(2, 3), Matrix::Zero(2, 1)),
                  NonSquareError);
}

TEST_CASE("filtration of the planar pair is the identity ladder") {
  const ModelSpec spec = build_model(planar_drift(), e1(2));
  const Filtration f = filtration(spec);
  CHECK(f.n == 2);
  CHECK(f.dims == std::vector<int>{1, 2});
  CHECK(max_abs(f.basis - Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("filtration of the full shift ladder has n = d") {
  const ModelSpec spec = build_model(shift_drift(4), e1(4));
  const Filtration f = filtration(spec);
  CHECK(f.n == 4);
  CHECK(f.dims == std::vector<int>{1, 2, 3, 4});
  CHECK(max_abs(f.basis - Matrix::Identity(4, 4)) == 0.0);
}

TEST_CASE("filtration with full-rank diffusion terminates at level one") {
  GaussianStream gs(21, 0);
  const Matrix a = random_matrix(3, 3, gs);
  const ModelSpec spec = build_model(a, Matrix::Identity(3, 3));
  const Filtration f = filtration(spec);
  CHECK(f.n == 1);
  CHECK(f.dims == std::vector<int>{3});
}

TEST_CASE("filtration basis is orthogonal and spans the subspace ladder") {
  GaussianStream gs(22, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const ModelSpec spec = hbtest::random_spec(4, 2, gs);
    const Filtration f = filtration(spec);
    const Index d = spec.d();
    CHECK(max_abs(f.basis.transpose() * f.basis - Matrix::Identity(d, d)) <
          1e-10);
    // First dims[k-1] columns must absorb every column of A^{k-1} B.
    Matrix akb = spec.B;
    for (int k = 1; k <= f.n; ++k) {
      const auto q = f.basis.leftCols(f.dims[k - 1]);
      const Matrix residual = akb - q * (q.transpose() * akb);
      CHECK(max_abs(residual) < 1e-8 * std::max(1.0, max_abs(akb)));
      akb = spec.A * akb;
    }
  }
}

TEST_CASE("u-blocks of the worked planar examples") {
  const ModelSpec kol = build_model(planar_drift(), e1(2));
  const UBlocks u = u_blocks(kol, filtration(kol));
  REQUIRE(u.blocks.size() == 2);
  CHECK(u.blocks[0](0, 0) == doctest::Approx(1.0));
  CHECK(u.blocks[1](0, 0) == doctest::Approx(1.0));

  Matrix a_ou(2, 2);
  a_ou << -1, 0, 1, 0;
  const ModelSpec ou = build_model(a_ou, e1(2));
  const UBlocks u_ou = u_blocks(ou, filtration(ou));
  CHECK(u_ou.blocks[0](0, 0) == doctest::Approx(1.0));
  CHECK(u_ou.blocks[1](0, 0) == doctest::Approx(1.0));
}

TEST_CASE("u-blocks of the shift ladder carry inverse factorials") {
  const ModelSpec spec = build_model(shift_drift(4), e1(4));
  const UBlocks u = u_blocks(spec, filtration(spec));
  double fact = 1.0;
  for (int i = 1; i <= 4; ++i) {
    if (i >= 2) fact *= (i - 1);
    CHECK(u.blocks[i - 1](0, 0) == doctest::Approx(1.0 / fact).epsilon(1e-14));
  }
}

TEST_CASE("principal part keeps exactly the subdiagonal blocks") {
  const ModelSpec kol = build_model(planar_drift(), e1(2));
  CHECK(max_abs(principal_part(kol, filtration(kol)) - kol.A) == 0.0);

  Matrix a_ou(2, 2);
  a_ou << -1, 0, 1, 0;
  const ModelSpec ou = build_model(a_ou, e1(2));
  Matrix want(2, 2);
  want << 0, 0, 1, 0;
  CHECK(max_abs(principal_part(ou, filtration(ou)) - want) == 0.0);

  GaussianStream gs(23, 0);
  const ModelSpec flat =
      build_model(random_matrix(3, 3, gs), Matrix::Identity(3, 3));
  CHECK(max_abs(principal_part(flat, filtration(flat))) == 0.0);
}

TEST_CASE("principal-part exponential reproduces the polynomial envelope") {
  // e^{r Ahat} B stacked blocks equal r^{k-1} u_k, here checked for the
  // drift with a nontrivial level-1 block.
  Matrix a_ou(2, 2);
  a_ou << -1, 0, 1, 0;
  const ModelSpec ou = build_model(a_ou, e1(2));
  const Filtration f = filtration(ou);
  const UBlocks u = u_blocks(ou, f);
  const Matrix ahat = principal_part(ou, f);
  const Matrix b_ad = adapted_diffusion(ou, f);
  GaussianStream gs(24, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const double r = 2.0 * (gs.next() > 0 ? 1 : -1) * std::abs(gs.next()) / 3;
    CHECK(max_abs(expm(r * ahat) * b_ad - u.u_hat(r)) < 1e-10);
  }
}

TEST_CASE("adjoint powers alternate sign on drift application") {
  const ModelSpec kol = build_model(planar_drift(), e1(2));
  CHECK(max_abs(adjoint_power(kol, 0) - kol.B) == 0.0);
  Vector want(2);
  want << 0, -1;
  CHECK(max_abs(adjoint_power(kol, 1) - want) == 0.0);

  const ModelSpec it3 = build_model(shift_drift(3), e1(3));
  Vector w3(3);
  w3 << 0, 0, 1;
  CHECK(max_abs(adjoint_power(it3, 2) - w3) == 0.0);
}

TEST_CASE("adjoint-power spans rebuild the subspace ladder") {
  GaussianStream gs(25, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const ModelSpec spec = hbtest::random_spec(4, 2, gs);
    const Filtration f = filtration(spec);
    for (int k = 1; k <= f.n; ++k) {
      Matrix stacked(spec.d(), k * spec.m());
      for (int l = 0; l < k; ++l) {
        stacked.middleCols(l * spec.m(), spec.m()) = adjoint_power(spec, l);
      }
      CHECK(numerical_rank(stacked).rank == f.dims[k - 1]);
      const auto q = f.basis.leftCols(f.dims[k - 1]);
      const Matrix residual = stacked - q * (q.transpose() * stacked);
      CHECK(max_abs(residual) < 1e-8 * std::max(1.0, max_abs(stacked)));
    }
  }
}

TEST_CASE("u-blocks are unchanged by ladder-preserving drift perturbations") {
  GaussianStream gs(26, 0);
  for (int rep = 0; rep < 8; ++rep) {
    const std::vector<int> dims = {2, 4, 5};
    const ModelSpec spec = random_adapted_spec(dims, 2, gs);
    const Filtration f = filtration(spec);
    const UBlocks base = u_blocks(spec, f);

    // N maps each E_k into E_k: block upper triangular in the adapted
    // (here: standard) basis, including the diagonal.
    Matrix n = Matrix::Zero(5, 5);
    auto start = [&](int k) { return k >= 2 ? dims[k - 2] : 0; };
    for (int k = 1; k <= 3; ++k) {
      for (int l = k; l <= 3; ++l) {
        const Index r0 = start(k), c0 = start(l);
        const Index rl = dims[k - 1] - r0, cl = dims[l - 1] - c0;
        n.block(r0, c0, rl, cl) = 0.3 * random_matrix(rl, cl, gs);
      }
    }
    const ModelSpec bumped = build_model(spec.A + n, spec.B);
    const Filtration fb = filtration(bumped);
    REQUIRE(fb.dims == f.dims);
    const UBlocks after = u_blocks(bumped, fb);
    for (size_t k = 0; k < base.blocks.size(); ++k) {
      CHECK(max_abs(after.blocks[k] - base.blocks[k]) < 1e-10);
    }
  }
}

TEST_CASE("filtration dims are invariant under input rotations") {
  GaussianStream gs(27, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const ModelSpec spec = hbtest::random_spec(4, 3, gs);
    const Filtration f = filtration(spec);
    const Matrix o = hbtest::random_orthogonal(3, gs);
    const ModelSpec rotated = build_model(spec.A, spec.B * o);
    CHECK(filtration(rotated).dims == f.dims);
  }
}
