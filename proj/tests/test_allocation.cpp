#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lamination/allocation.hpp"
#include "lamination/errors.hpp"

using namespace lamination;

namespace {

// P[alpha(k) = i] and P[alpha(k-1) = i, alpha(k) = i] by brute force over
// every slot permutation of a known map.
std::pair<double, double> permuted_oracle(const std::vector<int>& base, int i, int k) {
    std::vector<int> perm(base.size());
    std::iota(perm.begin(), perm.end(), 0);
    double n = 0, a = 0, j = 0;
    do {
        n += 1;
        const bool here = base[perm[k]] == i;
        a += here;
        j += here && k > 0 && base[perm[k - 1]] == i;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {a / n, j / n};
}

std::vector<AllocationModel> sample_models() {
    return {AllocationModel::monopoly(2, 3, 3),
            AllocationModel::bernoulli({0.3, 0.7}, 3),
            AllocationModel::bernoulli({0.2, 0.5, 0.3}, 2),
            AllocationModel::permuted({1, 1, 2}, 2),
            AllocationModel::permuted({1, 2, 3, 1}, 3),
            AllocationModel::explicit_joint({{{1, 2, 1}, 0.5}, {{2, 1, 2}, 0.5}}, 2),
            AllocationModel::explicit_joint({{{1, 1, 2}, 0.25}, {{2, 1, 1}, 0.5}, {{2, 2, 2}, 0.25}}, 2),
            AllocationModel::reserved_top(AllocationModel::bernoulli({0.4, 0.6}, 2), 3)};
}

}  // namespace

TEST_CASE("primary weights") {
    const auto m = AllocationModel::monopoly(3, 3, 4);
    for (int k = 0; k <= 4; ++k) CHECK(m.primary_weight(3, k) == 1.0);
    CHECK(m.primary_weight(1, 2) == 0.0);
    CHECK(AllocationModel::bernoulli({0.3, 0.7}, 3).primary_weight(1, 2) == doctest::Approx(0.3));
    const auto p = AllocationModel::permuted({1, 1, 2}, 2);
    for (int k = 0; k <= 2; ++k) {
        CHECK(p.primary_weight(1, k) == doctest::Approx(2.0 / 3.0));
        CHECK(p.primary_weight(1, k) == doctest::Approx(permuted_oracle({1, 1, 2}, 1, k).first));
    }
}

TEST_CASE("secondary weights") {
    for (const auto& m : sample_models()) {
        for (int i = 1; i <= m.N(); ++i) CHECK(m.secondary_weight(i, 0) == 0.0);
    }
    const auto mono = AllocationModel::monopoly(3, 3, 2);
    CHECK(mono.secondary_weight(3, 1) == 1.0);
    CHECK(mono.secondary_weight(3, 2) == 1.0);
    CHECK_THROWS_AS(mono.secondary_weight(1, 1), UndefinedCoupling);
    const auto b = AllocationModel::bernoulli({0.3, 0.7}, 3);
    CHECK(b.secondary_weight(2, 1) == doctest::Approx(0.7));
    CHECK(b.secondary_weight(1, 3) == doctest::Approx(0.3));

    // [1,1,2]: given slot k holds a 1, the other 1 is adjacent-before with prob 1/2
    const auto p = AllocationModel::permuted({1, 1, 2}, 2);
    for (int k = 1; k <= 2; ++k) {
        const auto [a, j] = permuted_oracle({1, 1, 2}, 1, k);
        CHECK(p.secondary_weight(1, k) == doctest::Approx(j / a));
        CHECK(p.secondary_weight(1, k) == doctest::Approx(0.5));
    }
    const auto p4 = AllocationModel::permuted({1, 2, 3, 1}, 3);
    for (int k = 1; k <= 3; ++k) {
        const auto [a, j] = permuted_oracle({1, 2, 3, 1}, 1, k);
        CHECK(p4.joint_weight(1, k) == doctest::Approx(j));
        CHECK(p4.primary_weight(1, k) == doctest::Approx(a));
    }
}

TEST_CASE("primary weights normalize") {
    for (const auto& m : sample_models()) {
        for (int k = 0; k <= m.K(); ++k) {
            double total = 0.0;
            for (int i = 1; i <= m.N(); ++i) total += m.primary_weight(i, k);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("sampling") {
    Rng rng(5);
    CHECK(AllocationModel::monopoly(2, 2, 3).sample(rng) == std::vector<int>{2, 2, 2, 2});
    CHECK(AllocationModel::bernoulli({1.0}, 2).sample(rng) == std::vector<int>{1, 1, 1});
}

TEST_CASE("sampled marginals match closed forms within 3 standard errors") {
    for (const auto& m : sample_models()) {
        Rng rng(77);
        const int n = 100000;
        const int slots = m.K() + 1;
        std::vector<std::vector<double>> a(static_cast<std::size_t>(m.N()), std::vector<double>(slots, 0.0));
        auto joint = a;
        for (int t = 0; t < n; ++t) {
            const auto map = m.sample(rng);
            for (int k = 0; k < slots; ++k) {
                a[map[k] - 1][k] += 1;
                if (k > 0 && map[k - 1] == map[k]) joint[map[k] - 1][k] += 1;
            }
        }
        for (int i = 1; i <= m.N(); ++i) {
            for (int k = 0; k < slots; ++k) {
                const double p = m.primary_weight(i, k);
                const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / n);
                CHECK(std::abs(a[i - 1][k] / n - p) < 3 * se + 1e-12);
                const double q = m.joint_weight(i, k);
                const double se_q = std::sqrt(std::max(q * (1 - q), 1e-12) / n);
                CHECK(std::abs(joint[i - 1][k] / n - q) < 3 * se_q + 1e-12);
            }
        }
    }
}

TEST_CASE("freeness predicates") {
    CHECK_FALSE(AllocationModel::monopoly(1, 1, 2).is_locally_free());
    CHECK_FALSE(AllocationModel::monopoly(1, 1, 2).is_free());
    CHECK_FALSE(AllocationModel::bernoulli({0.4, 0.6}, 2).is_locally_free());
    CHECK_FALSE(AllocationModel::bernoulli({0.4, 0.6}, 2).is_free());
    const auto alt = AllocationModel::explicit_joint({{{1, 2, 1, 2}, 0.5}, {{2, 1, 2, 1}, 0.5}}, 2);
    CHECK(alt.is_locally_free());
    CHECK_FALSE(alt.is_free());
    const auto inj = AllocationModel::explicit_joint({{{3, 1, 2}, 1.0}}, 3);
    CHECK(inj.is_free());
    CHECK(inj.is_locally_free());
    CHECK(AllocationModel::permuted({1, 2, 3}, 3).is_free());
    for (const auto& m : sample_models()) {
        if (m.is_free()) CHECK(m.is_locally_free());
    }
}

TEST_CASE("symmetry") {
    CHECK(AllocationModel::bernoulli({0.3, 0.7}, 3).is_symmetric());
    CHECK(AllocationModel::permuted({1, 1, 2}, 2).is_symmetric());
    CHECK_FALSE(AllocationModel::explicit_joint({{{1, 1, 2}, 1.0}}, 2).is_symmetric());
}

TEST_CASE("explicit joint size cap") {
    std::vector<int> big(13, 1);
    CHECK_THROWS(AllocationModel::explicit_joint({{big, 1.0}}, 8));
}

TEST_CASE("monopoly is blind") { CHECK(AllocationModel::monopoly(1, 1, 1).blind()); }
