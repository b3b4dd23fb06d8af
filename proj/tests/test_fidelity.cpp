#include <doctest.h>

#include <cmath>

#include "msred/fidelity.hpp"
#include "msred/random.hpp"
#include "oracles.hpp"

using namespace msred;

namespace {

FidelityProblem small_problem(std::uint64_t seed) {
    const MeasurementModel model = make_model(make_gaussian_kernel(3, 0.8), 2, {4, 4, 1});
    Rng rng(seed);
    MeasurementVector y(model.output_size());
    for (double& v : y.values) v = rng.gaussian();
    return make_fidelity_problem(model, std::move(y), seed);
}

}  // namespace

TEST_SUITE("fidelity") {

TEST_CASE("eval_g is zero when the data are explained exactly") {
    const MeasurementModel model = make_model(make_gaussian_kernel(3, 1.1), 2, {6, 6, 2});
    Rng rng(1);
    const DataCube x = random_cube(model.input_dims, rng);
    FidelityProblem p = make_fidelity_problem(model, apply(model, x), 1);
    CHECK(eval_g(p, x) == 0.0);
    const DataCube g = grad_g(p, x);
    for (double v : g.values) CHECK(v == 0.0);
}

TEST_CASE("identity model with zero data reduces to half the squared norm") {
    const MeasurementModel model = make_model(Kernel2D{}, 1, {3, 4, 2});
    FidelityProblem p = make_fidelity_problem(model, MeasurementVector(model.output_size()), 2);
    Rng rng(2);
    const DataCube x = random_cube(model.input_dims, rng);
    CHECK(eval_g(p, x) == doctest::Approx(0.5 * norm2(x) * norm2(x)).epsilon(1e-13));
    const DataCube g = grad_g(p, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(g.values[i] == x.values[i]);  // identity operator, exact arithmetic
    }
}

TEST_CASE("eval_g matches the dense evaluation") {
    FidelityProblem p = small_problem(31);
    const std::vector<double> mat = oracle::dense_matrix(p.model);
    Rng rng(32);
    const DataCube x = random_cube(p.model.input_dims, rng);
    const std::vector<double> ax = oracle::matvec(mat, p.model.output_size(), x.size(), x.values);
    double want = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
        const double r = p.y.values[i] - ax[i];
        want += 0.5 * r * r;
    }
    CHECK(eval_g(p, x) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("grad_g matches central finite differences") {
    FidelityProblem p = small_problem(41);
    Rng rng(42);
    const DataCube x = random_cube(p.model.input_dims, rng);
    const DataCube grad = grad_g(p, x);
    const DataCube fd = oracle::central_gradient(
        [&](const DataCube& z) { return eval_g(p, z); }, x, 1e-6);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double d = grad.values[i] - fd.values[i];
        num += d * d;
        den += grad.values[i] * grad.values[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-5);
}

TEST_CASE("lipschitz constant: known values and the dense oracle") {
    SUBCASE("identity model") {
        const MeasurementModel model = make_model(Kernel2D{}, 1, {4, 4, 1});
        FidelityProblem p = make_fidelity_problem(model, MeasurementVector(16), 3);
        CHECK(p.lipschitz == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("normalized kernel at s=1") {
        const MeasurementModel model = make_model(make_gaussian_kernel(5, 1.3), 1, {8, 8, 1});
        FidelityProblem p = make_fidelity_problem(model, MeasurementVector(64), 4);
        CHECK(std::abs(p.lipschitz - 1.0) <= 1e-8);
    }
    SUBCASE("decimated model vs dense sigma_max squared") {
        FidelityProblem p = small_problem(51);
        const std::vector<double> mat = oracle::dense_matrix(p.model);
        const std::vector<double> gram = oracle::gram(mat, p.model.output_size(), 16);
        const double want = oracle::jacobi_max_eigenvalue(gram, 16);
        CHECK(std::abs(p.lipschitz - want) <= 1e-6);
    }
}

TEST_CASE("gradient is lipschitz with the estimated constant") {
    FidelityProblem p = small_problem(61);
    Rng rng(62);
    for (int trial = 0; trial < 50; ++trial) {
        const DataCube x = random_cube(p.model.input_dims, rng);
        const DataCube z = random_cube(p.model.input_dims, rng);
        const DataCube gx = grad_g(p, x);
        const DataCube gz = grad_g(p, z);
        double dg = 0.0, dx = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double a = gx.values[i] - gz.values[i];
            const double b = x.values[i] - z.values[i];
            dg += a * a;
            dx += b * b;
        }
        CHECK(std::sqrt(dg) <= (p.lipschitz + 1e-8) * std::sqrt(dx));
    }
}

TEST_CASE("g is convex on random pairs") {
    FidelityProblem p = small_problem(71);
    Rng rng(72);
    for (int trial = 0; trial < 50; ++trial) {
        const DataCube x = random_cube(p.model.input_dims, rng);
        const DataCube z = random_cube(p.model.input_dims, rng);
        DataCube mid(p.model.input_dims);
        for (std::size_t i = 0; i < x.size(); ++i) {
            mid.values[i] = 0.5 * (x.values[i] + z.values[i]);
        }
        CHECK(eval_g(p, mid) <= 0.5 * eval_g(p, x) + 0.5 * eval_g(p, z) + 1e-12);
    }
}

TEST_CASE("grad_g is affine in x") {
    FidelityProblem p = small_problem(81);
    Rng rng(82);
    const DataCube x = random_cube(p.model.input_dims, rng);
    const DataCube z = random_cube(p.model.input_dims, rng);
    const DataCube g0 = grad_g(p, DataCube(p.model.input_dims));
    const DataCube gx = grad_g(p, x);
    const DataCube gz = grad_g(p, z);

    // (grad(x) - grad(0)) is linear: check it on x + 2z
    DataCube combo(p.model.input_dims);
    for (std::size_t i = 0; i < x.size(); ++i) {
        combo.values[i] = x.values[i] + 2.0 * z.values[i];
    }
    const DataCube gc = grad_g(p, combo);
    double gap_sq = 0.0, ref_sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double want = (gx.values[i] - g0.values[i]) + 2.0 * (gz.values[i] - g0.values[i]);
        const double got = gc.values[i] - g0.values[i];
        gap_sq += (got - want) * (got - want);
        ref_sq += want * want;
    }
    CHECK(std::sqrt(gap_sq) <= 1e-12 * std::sqrt(ref_sq));
}

TEST_CASE("shape mismatches are rejected") {
    FidelityProblem p = small_problem(91);
    CHECK_THROWS_AS(eval_g(p, DataCube({2, 2, 1})), ShapeError);
    CHECK_THROWS_AS(grad_g(p, DataCube({2, 2, 1})), ShapeError);
}

}  // TEST_SUITE
