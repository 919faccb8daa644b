#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "rydoa/angular.hpp"
#include "rydoa/error.hpp"

using namespace rydoa;
using namespace rydoa::angular;

namespace {

__extension__ typedef __int128 i128;

i128 fact(int n) {
  i128 r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

i128 gcd(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

struct Rational {
  i128 num = 0;
  i128 den = 1;
  void add(i128 n, i128 d) {
    num = num * d + n * den;
    den *= d;
    const i128 g = gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
};

// Clebsch-Gordan coefficient from the explicit summation formula, with every
// integer k tried and exact rational arithmetic throughout. Arguments are
// doubled quantum numbers.
double cg_oracle(int j1, int m1, int j2, int m2, int j, int m) {
  if (m1 + m2 != m) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m) > j) return 0.0;
  if (j > j1 + j2 || j < std::abs(j1 - j2) || (j1 + j2 + j) % 2 != 0) return 0.0;
  auto h = [](int twice) { return twice / 2; };
  // Prefactor squared as an exact rational.
  const i128 pre_num = static_cast<i128>(j + 1) * fact(h(j + j1 - j2)) * fact(h(j - j1 + j2)) * fact(h(j1 + j2 - j)) *
                       fact(h(j + m)) * fact(h(j - m)) * fact(h(j1 - m1)) * fact(h(j1 + m1)) * fact(h(j2 - m2)) *
                       fact(h(j2 + m2));
  const i128 pre_den = fact(h(j1 + j2 + j) + 1);
  Rational sum;
  for (int k = 0; k <= 20; ++k) {
    const int args[] = {k, h(j1 + j2 - j) - k, h(j1 - m1) - k, h(j2 + m2) - k, h(j - j2 + m1) + k, h(j - j1 - m2) + k};
    bool ok = true;
    i128 d = 1;
    for (int a : args) {
      if (a < 0) {
        ok = false;
        break;
      }
      d *= fact(a);
    }
    if (!ok) continue;
    sum.add(k % 2 == 0 ? 1 : -1, d);
  }
  if (sum.num == 0) return 0.0;
  const long double sq = static_cast<long double>(pre_num) / static_cast<long double>(pre_den) *
                         static_cast<long double>(sum.num) * static_cast<long double>(sum.num) /
                         (static_cast<long double>(sum.den) * static_cast<long double>(sum.den));
  return static_cast<double>((sum.num > 0 ? 1.0L : -1.0L) * std::sqrt(sq));
}

// 3-j from the oracle CG: (-1)^(j1 - j2 - m3) / sqrt(2 j3 + 1) <j1 m1; j2 m2 | j3 -m3>.
double three_j_oracle(int j1, int j2, int j3, int m1, int m2, int m3) {
  const double cg = cg_oracle(j1, m1, j2, m2, j3, -m3);
  const int phase = (j1 - j2 - m3) / 2;
  return (phase % 2 == 0 ? 1.0 : -1.0) * cg / std::sqrt(j3 + 1.0);
}

HalfInt H(int twice) { return HalfInt::from_twice(twice); }

double lib3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  return wigner_3j(H(j1), H(j2), H(j3), H(m1), H(m2), H(m3));
}

// Angular momentum matrices of spin j (doubled) in the |j m> basis, m descending.
struct Spin {
  Eigen::MatrixXd jz, jminus;
};

Spin spin(int j) {
  const int d = j + 1;
  Spin s{Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d)};
  for (int i = 0; i < d; ++i) {
    const double m = 0.5 * (j - 2 * i);
    s.jz(i, i) = m;
    if (i + 1 < d) s.jminus(i + 1, i) = std::sqrt(0.5 * j * (0.5 * j + 1) - m * (m - 1));
  }
  return s;
}

// <j1 m1; j2 m2 | J M> by building |J J> in the product space (J^2 eigenvector
// in the M = J sector, Condon-Shortley sign) and lowering.
double cg_lowering(int j1, int m1, int j2, int m2, int J, int M) {
  const Spin a = spin(j1), b = spin(j2);
  const int d1 = j1 + 1, d2 = j2 + 1;
  const Eigen::MatrixXd i1 = Eigen::MatrixXd::Identity(d1, d1), i2 = Eigen::MatrixXd::Identity(d2, d2);
  auto kron = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    Eigen::MatrixXd out(x.rows() * y.rows(), x.cols() * y.cols());
    for (int r = 0; r < x.rows(); ++r)
      for (int c = 0; c < x.cols(); ++c) out.block(r * y.rows(), c * y.cols(), y.rows(), y.cols()) = x(r, c) * y;
    return out;
  };
  const Eigen::MatrixXd jz = kron(a.jz, i2) + kron(i1, b.jz);
  const Eigen::MatrixXd jm = kron(a.jminus, i2) + kron(i1, b.jminus);
  const Eigen::MatrixXd jp = jm.transpose();
  const Eigen::MatrixXd j2op = jp * jm + jz * jz - jz;
  auto index = [&](int ma, int mb) { return ((j1 - ma) / 2) * d2 + (j2 - mb) / 2; };

  std::vector<int> sector;
  for (int ma = -j1; ma <= j1; ma += 2)
    for (int mb = -j2; mb <= j2; mb += 2)
      if (ma + mb == J) sector.push_back(index(ma, mb));
  Eigen::MatrixXd sub(sector.size(), sector.size());
  for (std::size_t r = 0; r < sector.size(); ++r)
    for (std::size_t c = 0; c < sector.size(); ++c) sub(r, c) = j2op(sector[r], sector[c]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
  const double target = 0.5 * J * (0.5 * J + 1);
  int pick = 0;
  for (int k = 0; k < es.eigenvalues().size(); ++k)
    if (std::abs(es.eigenvalues()(k) - target) < std::abs(es.eigenvalues()(pick) - target)) pick = k;
  Eigen::VectorXd state = Eigen::VectorXd::Zero(d1 * d2);
  for (std::size_t r = 0; r < sector.size(); ++r) state(sector[r]) = es.eigenvectors()(r, pick);
  // Condon-Shortley: <j1 j1; j2 J-j1 | J J> > 0.
  const int top = index(j1, J - j1);
  if (state(top) < 0) state = -state;
  for (int m = J; m > M; m -= 2) {
    state = jm * state;
    state.normalize();
  }
  return state(index(m1, m2));
}

}  // namespace

TEST_CASE("3-j matches the exact-rational oracle for every j <= 2") {
  int checked = 0;
  for (int j1 = 0; j1 <= 4; ++j1)
    for (int j2 = 0; j2 <= 4; ++j2)
      for (int j3 = 0; j3 <= 4; ++j3)
        for (int m1 = -j1; m1 <= j1; m1 += 2)
          for (int m2 = -j2; m2 <= j2; m2 += 2)
            for (int m3 = -j3; m3 <= j3; m3 += 2) {
              CHECK(std::abs(lib3j(j1, j2, j3, m1, m2, m3) - three_j_oracle(j1, j2, j3, m1, m2, m3)) < 1e-12);
              ++checked;
            }
  CHECK(checked > 1000);
}

TEST_CASE("Clebsch-Gordan matches the lowering-operator construction") {
  for (int j1 = 1; j1 <= 4; ++j1)
    for (int j2 = 1; j2 <= 2; ++j2)
      for (int J = std::abs(j1 - j2); J <= j1 + j2; J += 2)
        for (int M = -J; M <= J; M += 2)
          for (int m1 = -j1; m1 <= j1; m1 += 2) {
            const int m2 = M - m1;
            if (std::abs(m2) > j2) continue;
            const double lib = clebsch_gordan(H(j1), H(m1), H(j2), H(m2), H(J), H(M));
            CHECK(std::abs(lib - cg_lowering(j1, m1, j2, m2, J, M)) < 1e-12);
          }
}

TEST_CASE("3-j symmetry relations hold exhaustively") {
  for (int j1 = 0; j1 <= 4; ++j1)
    for (int j2 = 0; j2 <= 4; ++j2)
      for (int j3 = 0; j3 <= 4; ++j3)
        for (int m1 = -j1; m1 <= j1; m1 += 2)
          for (int m2 = -j2; m2 <= j2; m2 += 2)
            for (int m3 = -j3; m3 <= j3; m3 += 2) {
              const double v = lib3j(j1, j2, j3, m1, m2, m3);
              const double odd = ((j1 + j2 + j3) / 2) % 2 == 0 ? 1.0 : -1.0;
              // even permutations
              CHECK(std::abs(v - lib3j(j2, j3, j1, m2, m3, m1)) < 1e-14);
              CHECK(std::abs(v - lib3j(j3, j1, j2, m3, m1, m2)) < 1e-14);
              // odd permutations and sign reversal carry (-1)^(j1+j2+j3)
              if ((j1 + j2 + j3) % 2 != 0) continue;
              CHECK(std::abs(v - odd * lib3j(j2, j1, j3, m2, m1, m3)) < 1e-14);
              CHECK(std::abs(v - odd * lib3j(j1, j3, j2, m1, m3, m2)) < 1e-14);
              CHECK(std::abs(v - odd * lib3j(j1, j2, j3, -m1, -m2, -m3)) < 1e-14);
            }
}

TEST_CASE("3-j orthogonality over projections") {
  for (int j1 = 1; j1 <= 4; ++j1)
    for (int j2 = 1; j2 <= 4; ++j2)
      for (int j3 = std::abs(j1 - j2); j3 <= j1 + j2; j3 += 2)
        for (int m3 = -j3; m3 <= j3; m3 += 2) {
          double s = 0.0;
          for (int m1 = -j1; m1 <= j1; m1 += 2) {
            const int m2 = -m3 - m1;
            if (std::abs(m2) <= j2) s += std::pow(lib3j(j1, j2, j3, m1, m2, m3), 2);
          }
          CHECK(s == doctest::Approx(1.0 / (j3 + 1)).epsilon(1e-13));
        }
}

TEST_CASE("3-j and Clebsch-Gordan goldens") {
  CHECK(lib3j(1, 2, 1, -1, 0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
  CHECK(lib3j(3, 2, 1, -1, 0, 1) == doctest::Approx(-1.0 / std::sqrt(6.0)).epsilon(1e-14));
  // Condon-Shortley gives +1/sqrt(3) here.
  CHECK(clebsch_gordan(H(1), H(1), H(2), H(0), H(1), H(1)) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(clebsch_gordan(H(1), H(1), H(1), H(-1), H(0), H(0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(lib3j(0, 0, 0, 0, 0, 0) == 1.0);
}

TEST_CASE("selection rules and validation") {
  CHECK(lib3j(1, 2, 1, 1, 0, 1) == 0.0);   // m sum
  CHECK(lib3j(1, 1, 6, 1, -1, 0) == 0.0);  // triangle
  CHECK(lib3j(2, 2, 2, 0, 0, 0) == 0.0);   // odd j sum with all m zero
  // |m| > j: zero in lenient mode, error in strict mode
  CHECK(wigner_3j(H(1), H(2), H(1), H(3), H(-2), H(-1)) == 0.0);
  CHECK_THROWS_AS(wigner_3j(H(1), H(2), H(1), H(3), H(-2), H(-1), Validation::strict), Error);
  // parity mismatch always throws
  CHECK_THROWS_AS(wigner_3j(H(1), H(2), H(1), H(0), H(0), H(0)), Error);
}

TEST_CASE("HalfInt arithmetic and printing") {
  constexpr HalfInt a = HalfInt::half(3);
  static_assert(a.twice() == 3);
  CHECK(a.value() == 1.5);
  CHECK((a + HalfInt::half(1)) == 2_j);
  CHECK((-a).str() == "-3/2");
  CHECK((2_j).str() == "2");
  CHECK(!a.is_integer());
}

TEST_CASE("spherical basis is orthonormal with Condon-Shortley phases") {
  for (const Eigen::Vector3d& axis :
       {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(-1, 0, 0),
        Eigen::Vector3d(1, 2, -2).normalized()}) {
    const auto b = basis_for_axis(axis);
    for (int p = -1; p <= 1; ++p)
      for (int q = -1; q <= 1; ++q) CHECK(std::abs(b[p].dot(b[q]) - (p == q ? 1.0 : 0.0)) < 1e-14);
    CHECK((b[0] - axis.cast<std::complex<double>>()).norm() < 1e-14);
    // e_{-q} = (-1)^q e_q^*
    CHECK((b[-1] + b[1].conjugate()).norm() < 1e-14);
    CHECK((b.axis.cross(b.u) - b.v).norm() < 1e-14);
    const Eigen::Vector3d f(0.3, -1.1, 0.7);
    const auto comp = b.components(f);
    Eigen::Vector3cd back = Eigen::Vector3cd::Zero();
    for (int q = -1; q <= 1; ++q) back += comp[static_cast<std::size_t>(q + 1)] * b[q];
    CHECK((back - f.cast<std::complex<double>>()).norm() < 1e-14);
  }
  const auto x = basis_for_axis(Eigen::Vector3d::UnitX());
  const std::complex<double> i(0, 1);
  const Eigen::Vector3cd ep = -(Eigen::Vector3cd(0, 1, 0) + i * Eigen::Vector3cd(0, 0, 1)) / std::sqrt(2.0);
  CHECK((x[1] - ep).norm() < 1e-15);
  CHECK_THROWS_AS(basis_for_axis(Eigen::Vector3d(0, 0, 2)), Error);
  CHECK_THROWS_AS(basis_for_axis(Eigen::Vector3d::Zero()), Error);
}
