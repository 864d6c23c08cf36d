#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "lamination/rng.hpp"

namespace lamination {

// Players are numbered 1..N; slots 0..K with slot 0 the top of block.

struct Monopoly {
    int player = 1;
};
// Each slot is assigned independently with pmf `weights`.
struct IndependentBernoulli {
    std::vector<double> weights;
};
// A known map over slots 0..K composed with a uniform slot permutation.
struct PermutedDeterministic {
    std::vector<int> map;
};
// Arbitrary finite law over maps; small K only.
struct ExplicitJoint {
    std::vector<std::vector<int>> maps;
    std::vector<double> probs;
};

class AllocationModel;

// Slot 0 held by a fixed player (e.g. an inert stand-in for nature); slots
// 1..K follow `rest`, whose own slot-0 draw is discarded.
struct ReservedTop {
    int player = 1;
    std::shared_ptr<const AllocationModel> rest;
};

struct AllocationOutcome {
    std::vector<int> map;
    double prob;
};

class AllocationModel {
public:
    using Kind = std::variant<Monopoly, IndependentBernoulli, PermutedDeterministic, ExplicitJoint, ReservedTop>;

    static constexpr int kMaxExplicitBits = 24;

    static AllocationModel monopoly(int player, int N, int K);
    static AllocationModel bernoulli(std::vector<double> weights, int K);
    static AllocationModel permuted(std::vector<int> map, int N);
    static AllocationModel explicit_joint(std::vector<AllocationOutcome> outcomes, int N, bool blind = true);
    // N becomes max(rest.N(), top_player).
    static AllocationModel reserved_top(const AllocationModel& rest, int top_player);

    const Kind& kind() const noexcept { return kind_; }
    std::string kind_name() const;
    int N() const noexcept { return N_; }
    int K() const noexcept { return K_; }
    // Slot assignment is independent of the orders it backruns. Structured
    // kinds are blind by construction.
    bool blind() const noexcept { return blind_; }

    // a_{i,k} = P[alpha(k) = i].
    double primary_weight(int player, int slot) const;
    // b_{i,k} = P[alpha(k-1) = i | alpha(k) = i]; zero at slot 0.
    // Throws UndefinedCoupling when a_{i,k} = 0 and k >= 1.
    double secondary_weight(int player, int slot) const;
    // P[alpha(k-1) = i, alpha(k) = i] = a_{i,k} b_{i,k}; defined for every slot.
    double joint_weight(int player, int slot) const;
    // Sum over slots of a_{i,k}.
    double total_weight(int player) const;

    std::vector<int> sample(Rng& rng) const;

    // No player ever holds two consecutive slots.
    bool is_locally_free() const;
    bool is_player_locally_free(int player) const;
    // alpha injective almost surely.
    bool is_free() const;
    // a_{i,k} independent of k (invariance under slot permutations).
    bool is_symmetric() const;

    std::size_t outcome_count() const;
    std::vector<AllocationOutcome> outcomes() const;

private:
    AllocationModel(Kind kind, int N, int K, bool blind) : kind_(std::move(kind)), N_(N), K_(K), blind_(blind) {}
    void require_indices(int player, int slot) const;

    Kind kind_;
    int N_;
    int K_;
    bool blind_;
};

inline double primary_weight(const AllocationModel& a, int i, int k) { return a.primary_weight(i, k); }
inline double secondary_weight(const AllocationModel& a, int i, int k) { return a.secondary_weight(i, k); }
inline std::vector<int> sample_allocation(const AllocationModel& a, Rng& rng) { return a.sample(rng); }
inline bool is_locally_free(const AllocationModel& a) { return a.is_locally_free(); }
inline bool is_free(const AllocationModel& a) { return a.is_free(); }

}  // namespace lamination
