#include "lhsforge/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "lhsforge/errors.hpp"

namespace lhsforge {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, const char* where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ValidationError(std::string("sweep config: unknown key '") + key + "' in " + where);
        }
    }
}

std::vector<double> grid_from_range(double start, double stop, double step) {
    if (!(step > 0.0) || !(stop >= start)) {
        throw ValidationError("sweep config: v_grid range needs step > 0 and stop >= start");
    }
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    std::vector<double> out;
    for (long i = 0; i <= n; ++i) {
        // Snap to 10 decimals so 0.1 + 2 * 0.05 reads back as 0.2.
        out.push_back(std::round((start + static_cast<double>(i) * step) * 1e10) / 1e10);
    }
    return out;
}

MeasurementClass parse_measurement(const json& j, int default_dim) {
    reject_unknown_keys(j, {"class", "dim", "outcomes"}, "measurement");
    const auto kind = parse_measurement_kind(j.value("class", std::string("pvm")));
    const int dim = j.value("dim", default_dim);
    switch (kind) {
        case MeasurementKind::PauliTriple:
            return MeasurementClass::pauli_triple();
        case MeasurementKind::QubitPVM:
            return MeasurementClass::qubit_pvm();
        case MeasurementKind::QuditPVM:
            return MeasurementClass::qudit_pvm(dim);
        case MeasurementKind::POVM:
            return MeasurementClass::povm(dim, j.value("outcomes", 0));
    }
    throw ValidationError("sweep config: unknown measurement class");
}

void apply_train_overrides(const json& j, TrainConfig& t) {
    reject_unknown_keys(j,
                        {"steps", "meas_per_step", "learning_rate", "cosine_decay", "optimizer", "beta1", "beta2",
                         "adam_eps", "loss_tolerance", "test_set_size", "seed", "n_hidden", "order", "log_every",
                         "snapshot_every", "checkpoint_path", "checkpoint_every"},
                        "train");
    t.steps = j.value("steps", t.steps);
    t.meas_per_step = j.value("meas_per_step", t.meas_per_step);
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.cosine_decay = j.value("cosine_decay", t.cosine_decay);
    if (j.contains("optimizer")) {
        const auto name = j.at("optimizer").get<std::string>();
        if (name == "adam") {
            t.optimizer.kind = OptimizerKind::Adam;
        } else if (name == "gd") {
            t.optimizer.kind = OptimizerKind::PlainGD;
        } else {
            throw ValidationError("sweep config: optimizer must be 'adam' or 'gd', got '" + name + "'");
        }
    }
    t.optimizer.beta1 = j.value("beta1", t.optimizer.beta1);
    t.optimizer.beta2 = j.value("beta2", t.optimizer.beta2);
    t.optimizer.eps = j.value("adam_eps", t.optimizer.eps);
    t.loss_tolerance = j.value("loss_tolerance", t.loss_tolerance);
    t.test_set_size = j.value("test_set_size", t.test_set_size);
    t.seed = j.value("seed", t.seed);
    t.n_hidden = j.value("n_hidden", t.n_hidden);
    t.order = j.value("order", t.order);
    t.log_every = j.value("log_every", t.log_every);
    t.snapshot_every = j.value("snapshot_every", t.snapshot_every);
    t.checkpoint_path = j.value("checkpoint_path", t.checkpoint_path);
    t.checkpoint_every = j.value("checkpoint_every", t.checkpoint_every);
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

template <class T>
T parse_field(std::string_view text, std::size_t line, const char* name) {
    T value{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ValidationError("sweep csv line " + std::to_string(line) + ": bad " + name + " '" +
                              std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next - pos));
        if (next == std::string_view::npos) {
            return out;
        }
        pos = next + 1;
    }
}

constexpr std::string_view kHashPrefix = "# config_hash=";

}  // namespace

void SweepConfig::validate() const {
    if (v_grid.empty()) {
        throw ValidationError("sweep config: v_grid is empty");
    }
    for (std::size_t i = 0; i < v_grid.size(); ++i) {
        if (!(v_grid[i] >= 0.0 && v_grid[i] <= 1.0)) {
            throw RangeError("sweep config: v_grid values must lie in [0, 1], got " + format_double(v_grid[i]));
        }
        if (i > 0 && !(v_grid[i] > v_grid[i - 1])) {
            throw ValidationError("sweep config: v_grid must be strictly ascending");
        }
    }
    if (repeats < 1) {
        throw ValidationError("sweep config: repeats must be >= 1");
    }
    if (output_path.empty()) {
        throw ValidationError("sweep config: output path is empty");
    }
    if (family == StateFamily::Custom && custom_state_path.empty()) {
        throw ValidationError("sweep config: a custom state needs a path");
    }
    train.validate();
}

std::vector<double> default_v_grid(StateFamily family) {
    return family == StateFamily::Isotropic3 ? grid_from_range(0.1, 0.6, 0.05) : grid_from_range(0.0, 0.8, 0.05);
}

SweepConfig parse_sweep_config(std::string_view document) {
    SweepConfig cfg;
    try {
        const json j = json::parse(document);
        if (!j.is_object()) {
            throw ValidationError("sweep config: top level must be an object");
        }
        reject_unknown_keys(j, {"state", "measurement", "v_grid", "repeats", "output", "train"}, "the top level");
        const json& st = j.at("state");
        reject_unknown_keys(st, {"family", "path"}, "state");
        cfg.family = parse_state_family(st.at("family").get<std::string>());
        cfg.custom_state_path = st.value("path", std::string());

        int dim_a = 2;
        if (cfg.family == StateFamily::Isotropic3) {
            dim_a = 3;
        } else if (cfg.family == StateFamily::Custom && !cfg.custom_state_path.empty()) {
            dim_a = load_state_file(cfg.custom_state_path).dim_a;
        }
        cfg.train.measurement_class = parse_measurement(j.value("measurement", json::object()), dim_a);
        if (!j.contains("measurement") && dim_a != 2) {
            cfg.train.measurement_class = MeasurementClass::qudit_pvm(dim_a);
        }

        if (!j.contains("v_grid")) {
            cfg.v_grid = default_v_grid(cfg.family);
        } else if (j.at("v_grid").is_array()) {
            cfg.v_grid = j.at("v_grid").get<std::vector<double>>();
        } else {
            const json& g = j.at("v_grid");
            reject_unknown_keys(g, {"start", "stop", "step"}, "v_grid");
            cfg.v_grid = grid_from_range(g.at("start").get<double>(), g.at("stop").get<double>(),
                                         g.at("step").get<double>());
        }
        cfg.repeats = j.value("repeats", cfg.repeats);
        cfg.output_path = j.value("output", cfg.output_path);
        if (j.contains("train")) {
            apply_train_overrides(j.at("train"), cfg.train);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("sweep config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read sweep config '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_sweep_config(ss.str());
}

std::string canonical_config(const SweepConfig& cfg) {
    const TrainConfig& t = cfg.train;
    json j;
    j["family"] = to_string(cfg.family);
    j["custom_state_path"] = cfg.custom_state_path;
    j["v_grid"] = cfg.v_grid;
    j["repeats"] = cfg.repeats;
    j["measurement"] = {{"kind", to_string(t.measurement_class.kind)},
                        {"dim", t.measurement_class.dim},
                        {"outcomes", t.measurement_class.n_outcomes}};
    j["train"] = {{"steps", t.steps},
                  {"meas_per_step", t.meas_per_step},
                  {"learning_rate", t.learning_rate},
                  {"cosine_decay", t.cosine_decay},
                  {"optimizer", t.optimizer.kind == OptimizerKind::Adam ? "adam" : "gd"},
                  {"beta1", t.optimizer.beta1},
                  {"beta2", t.optimizer.beta2},
                  {"adam_eps", t.optimizer.eps},
                  {"loss_tolerance", t.loss_tolerance},
                  {"test_set_size", t.effective_test_set_size()},
                  {"seed", t.seed},
                  {"n_hidden", t.n_hidden},
                  {"order", t.order},
                  {"snapshot_every", t.snapshot_every}};
    return j.dump();
}

std::string config_hash(const SweepConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_config(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

VisibilityState sweep_state(const SweepConfig& cfg, double v) {
    if (cfg.family != StateFamily::Custom) {
        return make_family_state(cfg.family, v);
    }
    if (!(v >= 0.0 && v <= 1.0)) {
        throw RangeError("visibility must lie in [0, 1], got " + format_double(v));
    }
    VisibilityState base = load_state_file(cfg.custom_state_path);
    const int n = base.dim_a * base.dim_b;
    CMatrix mixed = v * base.rho.matrix() + (1.0 - v) / n * CMatrix::Identity(n, n);
    return {StateFamily::Custom, v, DensityMatrix(mixed), base.dim_a, base.dim_b};
}

std::string format_record(const SweepRecord& r) {
    std::ostringstream ss;
    ss << format_double(r.v) << ',' << format_double(r.train_loss) << ',' << format_double(r.test_loss) << ','
       << r.steps << ',' << r.seed << ',' << to_string(r.verdict) << ',' << format_double(r.wall_time_s);
    return ss.str();
}

SweepCsv read_sweep_csv(std::istream& in) {
    SweepCsv out;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            if (line.starts_with(kHashPrefix)) {
                out.config_hash = line.substr(kHashPrefix.size());
            }
            continue;
        }
        if (!header_seen) {
            if (line != kSweepCsvHeader) {
                throw ValidationError("sweep csv line " + std::to_string(lineno) + ": expected header '" +
                                      std::string(kSweepCsvHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 7) {
            throw ValidationError("sweep csv line " + std::to_string(lineno) + ": expected 7 fields, got " +
                                  std::to_string(f.size()));
        }
        SweepRecord r;
        r.v = parse_field<double>(f[0], lineno, "v");
        r.train_loss = parse_field<double>(f[1], lineno, "train_loss");
        r.test_loss = parse_field<double>(f[2], lineno, "test_loss");
        r.steps = parse_field<std::int64_t>(f[3], lineno, "steps");
        r.seed = parse_field<std::uint64_t>(f[4], lineno, "seed");
        try {
            r.verdict = parse_verdict(f[5]);
        } catch (const ValidationError&) {
            throw ValidationError("sweep csv line " + std::to_string(lineno) + ": bad verdict '" +
                                  std::string(f[5]) + "'");
        }
        r.wall_time_s = parse_field<double>(f[6], lineno, "wall_time_s");
        out.records.push_back(r);
    }
    if (in.bad()) {
        throw IoError("error while reading sweep csv");
    }
    if (!header_seen && !out.records.empty()) {
        throw ValidationError("sweep csv: missing header");
    }
    return out;
}

SweepCsv read_sweep_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read sweep csv '" + path + "'");
    }
    return read_sweep_csv(in);
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, const SweepOptions& opts) {
    cfg.validate();
    if (opts.jobs < 1) {
        throw ValidationError("sweep: jobs must be >= 1");
    }
    const std::string hash = config_hash(cfg);
    namespace fs = std::filesystem;

    std::vector<SweepRecord> done;
    std::error_code ec;
    const bool exists = fs::exists(cfg.output_path, ec) && fs::file_size(cfg.output_path, ec) > 0;
    if (exists) {
        SweepCsv prior = read_sweep_csv_file(cfg.output_path);
        if (prior.config_hash != hash) {
            throw ValidationError("sweep: '" + cfg.output_path + "' was written by a different config (hash " +
                                  (prior.config_hash.empty() ? std::string("missing") : prior.config_hash) +
                                  ", expected " + hash + ")");
        }
        done = std::move(prior.records);
    }
    std::ofstream out(cfg.output_path, std::ios::app);
    if (!out) {
        throw IoError("cannot open sweep output '" + cfg.output_path + "' for writing");
    }
    if (!exists) {
        out << kHashPrefix << hash << '\n' << kSweepCsvHeader << '\n';
        out.flush();
        if (!out) {
            throw IoError("cannot write sweep output '" + cfg.output_path + "'");
        }
    }

    std::set<std::pair<double, std::uint64_t>> have;
    for (const auto& r : done) {
        have.emplace(r.v, r.seed);
    }
    struct Job {
        double v;
        std::uint64_t seed;
    };
    std::vector<Job> todo;
    for (double v : cfg.v_grid) {
        for (int rep = 0; rep < cfg.repeats; ++rep) {
            const std::uint64_t seed = cfg.train.seed + static_cast<std::uint64_t>(rep);
            if (!have.contains({v, seed})) {
                todo.push_back({v, seed});
            }
        }
    }
    // Fail on a bad custom state before spending time on training.
    if (!todo.empty()) {
        (void)sweep_state(cfg, todo.front().v);
    }

    std::mutex writer;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) {
                return;
            }
            {
                std::lock_guard lock(writer);
                if (failure) {
                    return;
                }
            }
            try {
                TrainConfig tc = cfg.train;
                tc.seed = todo[i].seed;
                tc.log = nullptr;
                if (!tc.checkpoint_path.empty()) {
                    tc.checkpoint_path += ".v" + format_double(todo[i].v) + ".s" + std::to_string(tc.seed);
                }
                TrainResult res = train(sweep_state(cfg, todo[i].v), tc);
                SweepRecord r{todo[i].v,         res.report.final_train_loss, res.report.final_test_loss,
                              res.report.steps_run, tc.seed,                res.report.verdict,
                              res.report.wall_time};
                std::lock_guard lock(writer);
                out << format_record(r) << '\n';
                out.flush();
                done.push_back(r);
                if (opts.log != nullptr) {
                    *opts.log << "v=" << format_double(r.v) << " seed=" << r.seed << " test_loss=" << r.test_loss
                              << " verdict=" << to_string(r.verdict) << " wall_time=" << r.wall_time_s << '\n';
                }
            } catch (...) {
                std::lock_guard lock(writer);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const int n_threads = std::min<int>(opts.jobs, static_cast<int>(todo.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    if (!out) {
        throw IoError("error while writing sweep output '" + cfg.output_path + "'");
    }
    std::sort(done.begin(), done.end(),
              [](const SweepRecord& a, const SweepRecord& b) { return std::tie(a.v, a.seed) < std::tie(b.v, b.seed); });
    return done;
}

ThresholdEstimate estimate_threshold(const std::vector<SweepRecord>& records, double eps) {
    if (!(eps > 0.0)) {
        throw ValidationError("estimate_threshold: eps must be positive");
    }
    std::map<double, double> best;
    for (const auto& r : records) {
        auto [it, inserted] = best.emplace(r.v, r.test_loss);
        if (!inserted) {
            it->second = std::min(it->second, r.test_loss);
        }
    }
    ThresholdEstimate est;
    const double* lo = nullptr;
    for (const auto& [v, loss] : best) {
        if (loss <= eps) {
            lo = &v;
        }
    }
    if (lo == nullptr) {
        throw NoBracketError("no visibility reaches test loss <= " + format_double(eps));
    }
    auto above = std::find_if(best.upper_bound(*lo), best.end(), [eps](const auto& e) { return e.second > eps; });
    if (above == best.end()) {
        throw NoBracketError("no visibility above " + format_double(*lo) + " has test loss > " + format_double(eps));
    }
    est.lo = *lo;
    est.hi = above->first;
    est.v_star = 0.5 * (est.lo + est.hi);
    for (auto it = best.begin(); std::next(it) != best.end(); ++it) {
        auto nx = std::next(it);
        if (nx->second < it->second - 0.5 * eps) {
            est.violations.push_back({it->first, nx->first, it->second, nx->second});
        }
    }
    return est;
}

}  // namespace lhsforge
