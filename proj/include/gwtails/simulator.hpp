#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "gwtails/offspring.hpp"
#include "gwtails/rng.hpp"

namespace gwtails {

struct SimulationOptions {
    //! Generations larger than this are drawn in one batched multinomial step.
    std::int64_t population_cap = 512;
    //! Z_k above this raises PopulationOverflow.
    std::int64_t overflow_limit = std::numeric_limits<std::int64_t>::max();
};

//! Replica-parallel Monte Carlo settings. Replica r uses stream (seed, lane, r).
struct MonteCarloOptions {
    std::uint64_t seed = 0;
    std::uint32_t lane = 0;
    int workers = 1;
    //! Replicas per work unit; fixed so results do not depend on workers.
    std::int64_t chunk = 4096;
    SimulationOptions sim;
};

//! One Galton-Watson path Z_0 = 1, ..., Z_n.
struct TrajectoryRecord {
    std::vector<std::int64_t> sizes;
    std::vector<double> w_values;
    //! max offspring count in generation k, k = 0..n-1 (0 when Z_k = 0).
    std::vector<std::int64_t> gen_max_offspring;
    std::optional<int> extinct_at;
    StreamId seed;
    bool capped = false;

    friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

struct EventOptions {
    double x = 1.0;
    double eps = 0.0;
    //! Jump threshold is m^{k+1} * multiplier * x; defaults to 1 + eps.
    std::optional<double> multiplier;

    double jump_factor() const { return multiplier.value_or(1.0 + eps); }
};

/*!
 * Bit k of b_k_holds: Z_j <= m^j x for all j <= k (k = 0..n).
 * Bit k of a_k_fired: B_k holds and some offspring count in generation k
 * exceeds m^{k+1} * jump_factor * x (k = 0..n-1).
 */
struct EventFlags {
    std::uint64_t b_k_holds = 0;
    std::uint64_t a_k_fired = 0;
    double threshold_x = 0.0;
    double eps = 0.0;
    double jump_factor = 1.0;

    bool b(int k) const { return (b_k_holds >> k) & 1u; }
    bool a(int k) const { return (a_k_fired >> k) & 1u; }
};

struct GenerationDraw {
    std::int64_t sum = 0;
    std::int64_t max = 0;
    bool batched = false;
};

/*!
 * Sum and maximum of z iid draws of xi restricted to xi <= hi (hi may be
 * INT64_MAX for no restriction). Exact in distribution in both the
 * per-individual and the batched (z > population_cap) path.
 */
GenerationDraw draw_generation(const OffspringLaw& law, std::int64_t z, RandomStream& rng,
                               const SimulationOptions& options = {},
                               std::int64_t hi = std::numeric_limits<std::int64_t>::max());

/*!
 * Sum and maximum of z iid draws conditioned on at least one draw exceeding t.
 * The first exceeding index is drawn from its truncated geometric law.
 */
GenerationDraw draw_generation_with_exceedance(const OffspringLaw& law, std::int64_t z, std::int64_t t,
                                               RandomStream& rng, const SimulationOptions& options = {});

//! P{max of z draws > t} = 1 - (1 - tail(t))^z.
double exceedance_probability(const OffspringLaw& law, std::int64_t z, std::int64_t t);

TrajectoryRecord simulate(const OffspringLaw& law, int n, RandomStream& rng, const SimulationOptions& options = {});

std::pair<TrajectoryRecord, EventFlags> simulate_with_events(const OffspringLaw& law, int n,
                                                             const EventOptions& events, RandomStream& rng,
                                                             const SimulationOptions& options = {});

//! Flags for an existing record; simulate_with_events uses this.
EventFlags compute_events(const TrajectoryRecord& record, double m, const EventOptions& events);

/*!
 * Generations 0..k as usual; in generation k one individual draws from
 * xi | xi > jump_threshold (jump_threshold = -1 means no conditioning), the
 * rest draw normally; then continue to n. An extinct generation k has no
 * individual to force and the path stays extinct.
 */
TrajectoryRecord simulate_forced_jump(const OffspringLaw& law, int n, int k, std::int64_t jump_threshold,
                                      RandomStream& rng, const SimulationOptions& options = {});

//! m^k * x rounded down to the integer scale of Z, saturating at INT64_MAX.
std::int64_t integer_threshold(double value);

}  // namespace gwtails
