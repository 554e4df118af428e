#include "sqz/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace sqz::sweep {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index + 0x51ed2701ULL));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned width = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
    width = static_cast<unsigned>(std::min<std::size_t>(width, n));
    if (width <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(width);
    for (unsigned w = 0; w < width; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<double> GridSpec::values() const {
    if (step <= 0.0) throw ConfigError("GridSpec: step must be > 0");
    std::vector<double> v;
    const double tol = 0.5 * step;
    for (double x = start; x <= stop + tol; x += step) v.push_back(x);
    if (v.empty()) v.push_back(start);
    return v;
}

GridSpec GridSpec::parse(const std::string& text) {
    GridSpec g;
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    try {
        if (c1 == std::string::npos) {
            g.start = g.stop = std::stod(text);
            g.step = 1.0;
            return g;
        }
        if (c2 == std::string::npos) throw ConfigError("");
        g.start = std::stod(text.substr(0, c1));
        g.stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        g.step = std::stod(text.substr(c2 + 1));
    } catch (...) {
        throw ConfigError("GridSpec: expected start:stop:step, got '" + text + "'");
    }
    if (g.step <= 0.0) throw ConfigError("GridSpec: step must be > 0 in '" + text + "'");
    return g;
}

void SweepSpec::validate() const {
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (axes[i].values.empty()) {
            throw ConfigError("SweepSpec: axis '" + axes[i].name + "' has no values");
        }
        for (std::size_t j = i + 1; j < axes.size(); ++j) {
            if (axes[i].name == axes[j].name) {
                throw ConfigError("SweepSpec: duplicate axis name '" + axes[i].name + "'");
            }
        }
    }
}

std::size_t SweepSpec::cell_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

std::vector<RunRecord> expand_and_run(const SweepSpec& spec, const CellFn& fn) {
    spec.validate();
    const std::size_t n = spec.cell_count();
    std::vector<RunRecord> records(n);

    parallel_for(n, spec.threads, [&](std::size_t cell) {
        RunRecord& rec = records[cell];
        std::map<std::string, double> params = spec.fixed;
        std::size_t rest = cell;
        for (auto it = spec.axes.rbegin(); it != spec.axes.rend(); ++it) {
            const std::size_t k = rest % it->values.size();
            rest /= it->values.size();
            params[it->name] = it->values[k];
        }
        for (const auto& a : spec.axes) rec.coords.emplace_back(a.name, params.at(a.name));

        const auto t0 = std::chrono::steady_clock::now();
        try {
            rec.payload = fn(params, derive_seed(spec.seed, cell));
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    return records;
}

namespace {

double payload_value(const RunRecord& rec, const std::string& key) {
    for (const auto& [k, v] : rec.payload) {
        if (k == key) return v;
    }
    throw IncompleteSweepError("marginalize: payload key '" + key + "' missing");
}

} // namespace

std::vector<RunRecord> marginalize(const std::vector<RunRecord>& records,
                                   const std::string& axis, const std::string& key) {
    std::vector<RunRecord> out;
    // group by the remaining coordinates, preserving first-seen order
    std::vector<std::string> group_keys;
    std::map<std::string, std::size_t> group_index;

    for (const auto& rec : records) {
        if (!rec.error.empty()) {
            throw IncompleteSweepError("marginalize: failed cell present: " + rec.error);
        }
        std::string gk;
        double axis_value = 0.0;
        bool has_axis = false;
        for (const auto& [name, value] : rec.coords) {
            if (name == axis) {
                axis_value = value;
                has_axis = true;
            } else {
                gk += name + "=" + std::to_string(value) + ";";
            }
        }
        if (!has_axis) throw IncompleteSweepError("marginalize: axis '" + axis + "' not found");

        auto it = group_index.find(gk);
        if (it == group_index.end()) {
            group_index.emplace(gk, out.size());
            RunRecord r;
            for (const auto& [name, value] : rec.coords) {
                if (name != axis) r.coords.emplace_back(name, value);
            }
            r.payload = rec.payload;
            r.payload.emplace_back("argmin_" + axis, axis_value);
            out.push_back(std::move(r));
        } else {
            RunRecord& r = out[it->second];
            if (payload_value(rec, key) < payload_value(r, key)) {
                const auto coords = r.coords;
                r.payload = rec.payload;
                r.payload.emplace_back("argmin_" + axis, axis_value);
            }
        }
    }
    return out;
}

} // namespace sqz::sweep
