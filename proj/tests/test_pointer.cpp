#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "optoweak/pointer.hpp"

using namespace optoweak;

namespace {

void require_valid_density(const DensOp& rho) {
    REQUIRE((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<DensOp> es(rho);
    REQUIRE(es.eigenvalues().minCoeff() > -1e-12);
    REQUIRE(std::abs(rho.trace().real() - 1.0) < 1e-10);
}

}  // namespace

TEST_CASE("thermal pointer construction", "[pointer]") {
    const Dim dim(40);

    const auto zero_T = make_pointer(PointerSpec::thermal(0.0), dim);
    REQUIRE(std::holds_alternative<DensOp>(zero_T));
    const DensOp& rho0 = std::get<DensOp>(zero_T);
    REQUIRE(std::abs(rho0(0, 0).real() - 1.0) < 1e-14);
    REQUIRE(rho0.diagonal().tail(39).cwiseAbs().maxCoeff() < 1e-14);

    const PointerState thermal_half = make_pointer(PointerSpec::thermal(0.5), dim);
    const DensOp& rho = std::get<DensOp>(thermal_half);
    require_valid_density(rho);
    // geometric law (1-z) z^n, up to the (tiny) truncation renormalization
    REQUIRE(rho(0, 0).real() == Catch::Approx(0.5).margin(1e-10));
    REQUIRE(rho(1, 1).real() == Catch::Approx(0.25).margin(1e-10));
    REQUIRE(rho(2, 2).real() == Catch::Approx(0.125).margin(1e-10));

    // mean occupation z/(1-z)
    const double nbar = expectation(number_op(dim), PointerState(rho)).real();
    REQUIRE(nbar == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("thermal spread matches the x standard deviation", "[pointer]") {
    for (double z : {0.2, 0.5, 0.8}) {
        const PointerSpec spec = PointerSpec::thermal(z);
        const Dim dim(min_pointer_dim(spec));
        const QuadratureMoments m = quadrature_moments(make_pointer(spec, dim));
        REQUIRE(std::sqrt(m.var_x) == Catch::Approx(pointer_spread(spec)).margin(1e-6));
    }
}

TEST_CASE("coherent pointer", "[pointer]") {
    const Dim dim(32);

    const auto ground_like = make_pointer(PointerSpec::coherent(0.0), dim);
    REQUIRE(std::holds_alternative<Ket>(ground_like));
    REQUIRE(std::abs(std::get<Ket>(ground_like)[0] - complex(1.0)) < 1e-14);

    const complex alpha(0.4, -0.7);
    const QuadratureMoments m = quadrature_moments(make_pointer(PointerSpec::coherent(alpha), dim));
    REQUIRE(m.mean_x == Catch::Approx(2.0 * alpha.real()).margin(1e-10));
    REQUIRE(m.mean_p == Catch::Approx(2.0 * alpha.imag()).margin(1e-10));
    REQUIRE(m.var_x == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("squeezed pointer variance along the antisqueezed quadrature", "[pointer]") {
    const PointerSpec spec = PointerSpec::squeezed(1.0, std::numbers::pi);
    const Dim dim(min_pointer_dim(spec));
    const QuadratureMoments m = quadrature_moments(make_pointer(spec, dim));
    REQUIRE(m.var_x == Catch::Approx(std::exp(2.0)).epsilon(1e-7));
    REQUIRE(m.var_p == Catch::Approx(std::exp(-2.0)).epsilon(1e-7));
}

TEST_CASE("coherent squeezed pointer", "[pointer]") {
    const PointerSpec spec = PointerSpec::coherent_squeezed(complex(0.3, 0.2), 0.6, 0.0);
    const Dim dim(min_pointer_dim(spec));
    const QuadratureMoments m = quadrature_moments(make_pointer(spec, dim));
    REQUIRE(m.mean_x == Catch::Approx(0.6).margin(1e-9));
    REQUIRE(m.mean_p == Catch::Approx(0.4).margin(1e-9));
    REQUIRE(m.var_x == Catch::Approx(std::exp(-1.2)).epsilon(1e-7));
}

TEST_CASE("fock mixture pointer", "[pointer]") {
    const Dim dim(24);
    const auto state = make_pointer(PointerSpec::fock_mixture({0.5, 0.25, 0.25}), dim);
    const DensOp& rho = std::get<DensOp>(state);
    require_valid_density(rho);
    REQUIRE(rho(0, 0).real() == Catch::Approx(0.5));
    REQUIRE(rho(2, 2).real() == Catch::Approx(0.25));

    REQUIRE_THROWS_AS(make_pointer(PointerSpec::fock_mixture({0.0, 0.0, 1.0}), Dim(3)),
                      TruncationError);
}

TEST_CASE("pointer spec validation", "[pointer]") {
    REQUIRE_THROWS_AS(PointerSpec::thermal(1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(PointerSpec::thermal(-0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(PointerSpec::fock_mixture({0.7, 0.2}), std::invalid_argument);
    REQUIRE_THROWS_AS(PointerSpec::fock_mixture({1.5, -0.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(PointerSpec::squeezed(-1.0, 0.0), std::invalid_argument);
}

TEST_CASE("amplification caps", "[pointer]") {
    REQUIRE(pointer_spread(PointerSpec::ground()) == 1.0);
    REQUIRE(pointer_spread(PointerSpec::coherent(complex(0.5, 0.5))) == 1.0);
    REQUIRE(pointer_spread(PointerSpec::thermal(0.5)) ==
            Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));
    REQUIRE(pointer_spread(PointerSpec::squeezed(1.0, 0.0)) ==
            Catch::Approx(std::numbers::e).epsilon(1e-12));
    REQUIRE(pointer_spread(PointerSpec::fock_mixture({1.0})) == 1.0);
    REQUIRE(pointer_spread(PointerSpec::fock_mixture({0.5, 0.0, 0.5})) ==
            Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));

    // monotone divergence toward z = 1
    double prev = pointer_spread(PointerSpec::thermal(0.0));
    REQUIRE(prev == 1.0);
    for (double z : {0.3, 0.6, 0.9, 0.99, 0.9999}) {
        const double cap = pointer_spread(PointerSpec::thermal(z));
        REQUIRE(cap > prev);
        prev = cap;
    }
}

TEST_CASE("dimensionless parameters from physical ones", "[pointer]") {
    const double omega_m = 2.0 * std::numbers::pi * 1e6;

    // hbar omega_m / kB T = ln 2  =>  z = 1/2
    const double T_half = hbar_si * omega_m / (kB_si * std::numbers::ln2);
    const PhysicalParams p(omega_m, 1e-12, T_half, 2.0 * std::numbers::pi * 3e14, 1e-2);
    REQUIRE(dimensionless_from_physical(p).z == Catch::Approx(0.5).epsilon(1e-12));

    // z -> 0 with T
    const PhysicalParams cold(omega_m, 1e-12, 1e-9, 2.0 * std::numbers::pi * 3e14, 1e-2);
    REQUIRE(dimensionless_from_physical(cold).z < 1e-300);

    // kappa is inversely proportional to the cavity length
    const PhysicalParams shorter(omega_m, 1e-12, T_half, 2.0 * std::numbers::pi * 3e14, 0.5e-2);
    REQUIRE(dimensionless_from_physical(shorter).kappa ==
            Catch::Approx(2.0 * dimensionless_from_physical(p).kappa).epsilon(1e-12));

    REQUIRE_THROWS_AS(PhysicalParams(0.0, 1e-12, 1.0, 1e14, 1e-2), std::invalid_argument);
}

TEST_CASE("minimal pointer dimensions respect the truncation rule", "[pointer]") {
    for (const PointerSpec& spec :
         {PointerSpec::ground(), PointerSpec::coherent(complex(0.8, 0.3)),
          PointerSpec::squeezed(1.0, std::numbers::pi), PointerSpec::thermal(0.5),
          PointerSpec::fock_mixture({0.2, 0.3, 0.5})}) {
        const int d = min_pointer_dim(spec);
        REQUIRE_NOTHROW(make_pointer(spec, Dim(d)));
    }
}
