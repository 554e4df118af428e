// sweep.hpp — Parameter-sweep orchestration: grid expansion, parallel
// dispatch with deterministic per-cell seeds, aggregation and marginals.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sqz/errors.hpp"

namespace sqz::sweep {

// splittable counter-based mixing (splitmix64 finalizer)
std::uint64_t mix64(std::uint64_t z);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Run fn(0..n-1) across a small work-stealing pool. threads <= 0 picks the
// hardware count (capped by n). Exceptions are captured and rethrown once
// all workers have drained.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct Axis {
    std::string name;
    std::vector<double> values;
};

struct GridSpec {
    double start = 0.0, stop = 0.0, step = 1.0;
    // endpoints inclusive within half-step tolerance
    std::vector<double> values() const;
    static GridSpec parse(const std::string& text); // "start:stop:step"
};

struct SweepSpec {
    std::string solver;
    std::map<std::string, double> fixed;
    std::vector<Axis> axes;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;

    void validate() const;
    std::size_t cell_count() const;
};

using Payload = std::vector<std::pair<std::string, double>>;

struct RunRecord {
    std::vector<std::pair<std::string, double>> coords;
    Payload payload;
    std::map<std::string, double> diagnostics;
    double wall_seconds = 0.0;
    std::string error; // empty on success
};

// params = fixed ∪ axis coordinates for this cell
using CellFn = std::function<Payload(const std::map<std::string, double>& params,
                                     std::uint64_t cell_seed)>;

// Execute every cell (parallel, deterministic seeds from (seed, cell index));
// per-cell failures are captured in RunRecord::error without aborting.
std::vector<RunRecord> expand_and_run(const SweepSpec& spec, const CellFn& fn);

// Per remaining coordinate, the record minimizing payload[key] over the
// marginalized axis; the argmin coordinate is retained in the payload as
// "argmin_<axis>". Throws IncompleteSweep on failed or missing cells.
std::vector<RunRecord> marginalize(const std::vector<RunRecord>& records,
                                   const std::string& axis, const std::string& key = "xi2");

} // namespace sqz::sweep
