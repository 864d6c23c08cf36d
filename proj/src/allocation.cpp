#include "lamination/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "lamination/errors.hpp"

namespace lamination {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > std::numeric_limits<std::size_t>::max() / b) return std::numeric_limits<std::size_t>::max();
    return a * b;
}

void require_players(const std::vector<int>& map, int N) {
    for (int p : map) {
        if (p < 1 || p > N) throw PreconditionError("allocation map names a player outside 1..N", {{"player", std::to_string(p)}});
    }
}

}  // namespace

AllocationModel AllocationModel::monopoly(int player, int N, int K) {
    if (N < 1 || K < 0) throw PreconditionError("monopoly needs N >= 1 and K >= 0");
    if (player < 1 || player > N) throw PreconditionError("monopolist outside 1..N", {{"player", std::to_string(player)}});
    return AllocationModel(Monopoly{player}, N, K, true);
}

AllocationModel AllocationModel::bernoulli(std::vector<double> weights, int K) {
    if (weights.empty() || K < 0) throw PreconditionError("bernoulli allocation needs weights and K >= 0");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0 && w <= 1.0)) throw PreconditionError("allocation weights must lie in [0, 1]", {{"w", format_double(w)}});
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("allocation weights must sum to one", {{"sum", format_double(total)}});
    for (double& w : weights) w /= total;
    const int N = static_cast<int>(weights.size());
    return AllocationModel(IndependentBernoulli{std::move(weights)}, N, K, true);
}

AllocationModel AllocationModel::permuted(std::vector<int> map, int N) {
    if (map.empty()) throw PreconditionError("permuted allocation needs a map over slots 0..K");
    require_players(map, N);
    const int K = static_cast<int>(map.size()) - 1;
    return AllocationModel(PermutedDeterministic{std::move(map)}, N, K, true);
}

AllocationModel AllocationModel::explicit_joint(std::vector<AllocationOutcome> outcomes, int N, bool blind) {
    if (outcomes.empty() || N < 1) throw PreconditionError("explicit allocation needs outcomes and N >= 1");
    const std::size_t slots = outcomes.front().map.size();
    if (slots == 0) throw PreconditionError("explicit allocation maps must cover slot 0");
    if (static_cast<double>(slots) * std::log2(static_cast<double>(std::max(N, 1))) > kMaxExplicitBits + 1e-9) {
        throw PreconditionError("explicit allocation exceeds the exhaustive-enumeration cap",
                                {{"slots", std::to_string(slots)}, {"N", std::to_string(N)}});
    }
    ExplicitJoint joint;
    double total = 0.0;
    for (auto& o : outcomes) {
        if (o.map.size() != slots) throw PreconditionError("explicit allocation maps must share one length");
        require_players(o.map, N);
        if (!(o.prob >= 0.0)) throw PreconditionError("explicit allocation probabilities must be non-negative");
        total += o.prob;
        joint.maps.push_back(std::move(o.map));
        joint.probs.push_back(o.prob);
    }
    if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("explicit allocation probabilities must sum to one", {{"sum", format_double(total)}});
    for (double& p : joint.probs) p /= total;
    const int K = static_cast<int>(slots) - 1;
    return AllocationModel(std::move(joint), N, K, blind);
}

AllocationModel AllocationModel::reserved_top(const AllocationModel& rest, int top_player) {
    if (top_player < 1) throw PreconditionError("top-of-block player must be positive");
    const int N = std::max(rest.N(), top_player);
    return AllocationModel(ReservedTop{top_player, std::make_shared<const AllocationModel>(rest)}, N, rest.K(), rest.blind());
}

std::string AllocationModel::kind_name() const {
    return std::visit(overloaded{[](const Monopoly&) { return "monopoly"; }, [](const IndependentBernoulli&) { return "bernoulli"; },
                                 [](const PermutedDeterministic&) { return "permuted"; }, [](const ExplicitJoint&) { return "explicit"; },
                                 [](const ReservedTop&) { return "reserved_top"; }},
                      kind_);
}

void AllocationModel::require_indices(int player, int slot) const {
    if (player < 1 || player > N_) throw PreconditionError("player outside 1..N", {{"player", std::to_string(player)}});
    if (slot < 0 || slot > K_) throw PreconditionError("slot outside 0..K", {{"slot", std::to_string(slot)}});
}

double AllocationModel::primary_weight(int player, int slot) const {
    require_indices(player, slot);
    return std::visit(overloaded{[player](const Monopoly& m) { return m.player == player ? 1.0 : 0.0; },
                                 [player](const IndependentBernoulli& b) { return b.weights[static_cast<std::size_t>(player - 1)]; },
                                 [this, player](const PermutedDeterministic& p) {
                                     const auto c = std::count(p.map.begin(), p.map.end(), player);
                                     return static_cast<double>(c) / static_cast<double>(K_ + 1);
                                 },
                                 [player, slot](const ExplicitJoint& j) {
                                     double acc = 0.0;
                                     for (std::size_t n = 0; n < j.maps.size(); ++n) {
                                         if (j.maps[n][static_cast<std::size_t>(slot)] == player) acc += j.probs[n];
                                     }
                                     return acc;
                                 },
                                 [player, slot](const ReservedTop& t) {
                                     if (slot == 0) return t.player == player ? 1.0 : 0.0;
                                     return player <= t.rest->N() ? t.rest->primary_weight(player, slot) : 0.0;
                                 }},
                      kind_);
}

double AllocationModel::joint_weight(int player, int slot) const {
    require_indices(player, slot);
    if (slot == 0) return 0.0;  // slot -1 belongs to nature
    return std::visit(overloaded{[player](const Monopoly& m) { return m.player == player ? 1.0 : 0.0; },
                                 [player](const IndependentBernoulli& b) {
                                     const double w = b.weights[static_cast<std::size_t>(player - 1)];
                                     return w * w;
                                 },
                                 [this, player](const PermutedDeterministic& p) {
                                     const auto c = static_cast<double>(std::count(p.map.begin(), p.map.end(), player));
                                     return c * (c - 1.0) / (static_cast<double>(K_ + 1) * static_cast<double>(K_));
                                 },
                                 [player, slot](const ExplicitJoint& j) {
                                     const auto k = static_cast<std::size_t>(slot);
                                     double acc = 0.0;
                                     for (std::size_t n = 0; n < j.maps.size(); ++n) {
                                         if (j.maps[n][k] == player && j.maps[n][k - 1] == player) acc += j.probs[n];
                                     }
                                     return acc;
                                 },
                                 [player, slot](const ReservedTop& t) {
                                     if (player > t.rest->N()) return 0.0;
                                     if (slot == 1) return t.player == player ? t.rest->primary_weight(player, 1) : 0.0;
                                     return t.rest->joint_weight(player, slot);
                                 }},
                      kind_);
}

double AllocationModel::secondary_weight(int player, int slot) const {
    require_indices(player, slot);
    if (slot == 0) return 0.0;
    const double a = primary_weight(player, slot);
    if (!(a > 0.0)) {
        throw UndefinedCoupling("secondary weight undefined where the primary weight vanishes",
                                {{"player", std::to_string(player)}, {"slot", std::to_string(slot)}});
    }
    return std::min(1.0, joint_weight(player, slot) / a);
}

double AllocationModel::total_weight(int player) const {
    double acc = 0.0;
    for (int k = 0; k <= K_; ++k) acc += primary_weight(player, k);
    return acc;
}

std::vector<int> AllocationModel::sample(Rng& rng) const {
    const auto slots = static_cast<std::size_t>(K_ + 1);
    return std::visit(overloaded{[slots](const Monopoly& m) { return std::vector<int>(slots, m.player); },
                                 [slots, &rng](const IndependentBernoulli& b) {
                                     std::vector<int> out(slots);
                                     for (int& p : out) p = static_cast<int>(rng.categorical(b.weights)) + 1;
                                     return out;
                                 },
                                 [&rng](const PermutedDeterministic& p) {
                                     auto out = p.map;
                                     rng.shuffle(std::span<int>(out));
                                     return out;
                                 },
                                 [&rng](const ExplicitJoint& j) { return j.maps[rng.categorical(j.probs)]; },
                                 [&rng](const ReservedTop& t) {
                                     auto out = t.rest->sample(rng);
                                     out[0] = t.player;
                                     return out;
                                 }},
                      kind_);
}

bool AllocationModel::is_player_locally_free(int player) const {
    for (int k = 1; k <= K_; ++k) {
        if (joint_weight(player, k) > 0.0) return false;
    }
    return true;
}

bool AllocationModel::is_locally_free() const {
    return std::visit(overloaded{[this](const Monopoly&) { return K_ == 0; },
                                 [this](const IndependentBernoulli&) { return K_ == 0; },
                                 [this](const PermutedDeterministic& p) {
                                     if (K_ == 0) return true;
                                     std::set<int> seen(p.map.begin(), p.map.end());
                                     return seen.size() == p.map.size();
                                 },
                                 [](const ExplicitJoint& j) {
                                     for (std::size_t n = 0; n < j.maps.size(); ++n) {
                                         if (j.probs[n] <= 0.0) continue;
                                         const auto& m = j.maps[n];
                                         for (std::size_t k = 1; k < m.size(); ++k) {
                                             if (m[k] == m[k - 1]) return false;
                                         }
                                     }
                                     return true;
                                 },
                                 [this](const ReservedTop&) {
                                     for (int i = 1; i <= N_; ++i) {
                                         if (!is_player_locally_free(i)) return false;
                                     }
                                     return true;
                                 }},
                      kind_);
}

bool AllocationModel::is_free() const {
    return std::visit(overloaded{[this](const Monopoly&) { return K_ == 0; },
                                 [this](const IndependentBernoulli&) { return K_ == 0; },
                                 [](const PermutedDeterministic& p) {
                                     std::set<int> seen(p.map.begin(), p.map.end());
                                     return seen.size() == p.map.size();
                                 },
                                 [](const ExplicitJoint& j) {
                                     for (std::size_t n = 0; n < j.maps.size(); ++n) {
                                         if (j.probs[n] <= 0.0) continue;
                                         std::set<int> seen(j.maps[n].begin(), j.maps[n].end());
                                         if (seen.size() != j.maps[n].size()) return false;
                                     }
                                     return true;
                                 },
                                 [this](const ReservedTop&) {
                                     if (!is_locally_free()) return false;
                                     if (outcome_count() > 1'000'000) {
                                         throw UnsupportedError("freeness of a large reserved-top allocation is not decidable exactly");
                                     }
                                     for (const auto& o : outcomes()) {
                                         std::set<int> seen(o.map.begin(), o.map.end());
                                         if (seen.size() != o.map.size()) return false;
                                     }
                                     return true;
                                 }},
                      kind_);
}

bool AllocationModel::is_symmetric() const {
    if (!std::holds_alternative<ExplicitJoint>(kind_) && !std::holds_alternative<ReservedTop>(kind_)) return true;
    for (int i = 1; i <= N_; ++i) {
        const double a0 = primary_weight(i, 0);
        for (int k = 1; k <= K_; ++k) {
            if (std::abs(primary_weight(i, k) - a0) > 1e-12) return false;
        }
    }
    return true;
}

std::size_t AllocationModel::outcome_count() const {
    return std::visit(overloaded{[](const Monopoly&) -> std::size_t { return 1; },
                                 [this](const IndependentBernoulli& b) {
                                     const auto n = static_cast<std::size_t>(
                                         std::count_if(b.weights.begin(), b.weights.end(), [](double w) { return w > 0.0; }));
                                     std::size_t total = 1;
                                     for (int k = 0; k <= K_; ++k) total = saturating_mul(total, n);
                                     return total;
                                 },
                                 [this](const PermutedDeterministic&) {
                                     std::size_t total = 1;
                                     for (std::size_t k = 2; k <= static_cast<std::size_t>(K_ + 1); ++k) total = saturating_mul(total, k);
                                     return total;
                                 },
                                 [](const ExplicitJoint& j) { return j.maps.size(); },
                                 [](const ReservedTop& t) { return t.rest->outcome_count(); }},
                      kind_);
}

std::vector<AllocationOutcome> AllocationModel::outcomes() const {
    const auto slots = static_cast<std::size_t>(K_ + 1);
    return std::visit(
        overloaded{[slots](const Monopoly& m) { return std::vector<AllocationOutcome>{{std::vector<int>(slots, m.player), 1.0}}; },
                   [slots](const IndependentBernoulli& b) {
                       std::vector<AllocationOutcome> out{{{}, 1.0}};
                       for (std::size_t k = 0; k < slots; ++k) {
                           std::vector<AllocationOutcome> next;
                           for (const auto& partial : out) {
                               for (std::size_t i = 0; i < b.weights.size(); ++i) {
                                   if (b.weights[i] <= 0.0) continue;
                                   auto map = partial.map;
                                   map.push_back(static_cast<int>(i) + 1);
                                   next.push_back({std::move(map), partial.prob * b.weights[i]});
                               }
                           }
                           out = std::move(next);
                       }
                       return out;
                   },
                   [](const PermutedDeterministic& p) {
                       std::vector<std::size_t> perm(p.map.size());
                       std::iota(perm.begin(), perm.end(), std::size_t{0});
                       std::vector<AllocationOutcome> out;
                       do {
                           std::vector<int> map;
                           for (std::size_t q : perm) map.push_back(p.map[q]);
                           out.push_back({std::move(map), 0.0});
                       } while (std::next_permutation(perm.begin(), perm.end()));
                       for (auto& o : out) o.prob = 1.0 / static_cast<double>(out.size());
                       return out;
                   },
                   [](const ExplicitJoint& j) {
                       std::vector<AllocationOutcome> out;
                       for (std::size_t n = 0; n < j.maps.size(); ++n) {
                           if (j.probs[n] > 0.0) out.push_back({j.maps[n], j.probs[n]});
                       }
                       return out;
                   },
                   [](const ReservedTop& t) {
                       auto out = t.rest->outcomes();
                       for (auto& o : out) o.map[0] = t.player;
                       return out;
                   }},
        kind_);
}

}  // namespace lamination
