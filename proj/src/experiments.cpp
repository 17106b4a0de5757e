#include "ordfuse/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include <json.hpp>

#include "ordfuse/errors.hpp"

namespace ordfuse {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::vector<int> kSensorCounts = {2, 4, 6, 8, 10, 15, 20, 30, 40, 50, 60};

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string num(long v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }

struct Table {
    explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}

    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    json extra = json::object();  // preset-specific settings for the sidecar
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json scenario_json(const ScenarioConfig& s) {
    return {{"M", s.M},
            {"N", s.N},
            {"K", s.K},
            {"tau_s", s.tau_s},
            {"tau_N", s.tau_N},
            {"tau", s.tau},
            {"pi0", s.pi0},
            {"sigma2", s.sigma2},
            {"sigma2_s", s.sigma2_s},
            {"model", s.model == MeasurementModel::EnergyChiSquare ? "energy" : "shift-in-mean"},
            {"mu", s.mu},
            {"rng_seed", s.rng_seed}};
}

json cost_json(const CostModel& c) {
    return {{"mode", c.mode == CostMode::ErrorMin ? "error-min" : "throughput"},
            {"omega", c.omega},
            {"R_p", c.R_p},
            {"R_s", c.R_s},
            {"eta_p", c.eta_p},
            {"eta_s", c.eta_s},
            {"delta_p", c.delta_p},
            {"delta_s", c.delta_s},
            {"e_pt", c.e_pt},
            {"e_st", c.e_st},
            {"P", c.P_col},
            {"L_f", c.L_f},
            {"L_b", c.L_b},
            {"c", c.c}};
}

json fading_json(const FadingConfig& f) {
    std::vector<double> means;
    for (const auto& g : f.gain) means.push_back(g.mean);
    return {{"W", f.W},          {"bits", f.bits},   {"tau_b", f.tau_b},
            {"time_unit", f.time_unit}, {"T_c", f.T_c}, {"P_over_sigma", f.P_over_sigma},
            {"Gamma", f.Gamma}, {"gain_mean", means}, {"participation_prob", participation_prob(0, f)}};
}

class Runner {
public:
    explicit Runner(const ConfigBundle& b) : b_(b) {
        opts_.threads = b.experiment.threads;
    }

    SimMetrics run(const ScenarioConfig& config, DetectorKind kind, CostMode mode,
                   const MonteCarloOptions* options = nullptr) const {
        return run(config, kind, with_mode(mode), options);
    }

    SimMetrics run(const ScenarioConfig& config, DetectorKind kind, const CostModel& costs,
                   const MonteCarloOptions* options = nullptr) const {
        DetectorChoice choice;
        choice.kind = kind;
        choice.costs = costs;
        choice.solver.grid_size = b_.experiment.grid_size;
        return run_monte_carlo(config, choice, b_.experiment.trials, b_.experiment.seed,
                               options ? *options : opts_);
    }

    CostModel with_mode(CostMode mode) const {
        CostModel c = b_.costs;
        c.mode = mode;
        return c;
    }

    ScenarioConfig sized(int M) const {
        ScenarioConfig c = with_sensor_count(b_.scenario, M);
        c.K = std::min(b_.scenario.K, M);
        return c;
    }

    const ConfigBundle& bundle() const { return b_; }
    const MonteCarloOptions& options() const { return opts_; }
    std::string trials() const { return num(b_.experiment.trials); }
    std::string seed() const { return num(b_.experiment.seed); }

private:
    const ConfigBundle& b_;
    MonteCarloOptions opts_;
};

Table throughput_vs_m(const Runner& r) {
    Table t{{"omega", "M", "K", "throughput_primary", "throughput_secondary", "stderr_primary",
             "stderr_secondary", "avg_probed", "trials", "seed"}};
    const std::vector<double> omegas = {0.5, 0.999};
    for (double omega : omegas) {
        for (int M : kSensorCounts) {
            const ScenarioConfig c = r.sized(M);
            CostModel costs = r.with_mode(CostMode::WeightedThroughput);
            costs.omega = omega;
            const SimMetrics m = r.run(c, DetectorKind::DP, costs);
            t.rows.push_back({num(omega), num(M), num(c.K), num(m.norm_throughput_primary()),
                              num(m.norm_throughput_secondary()),
                              num(m.norm_throughput_primary_stderr()),
                              num(m.norm_throughput_secondary_stderr()), num(m.avg_stage()),
                              r.trials(), r.seed()});
        }
    }
    t.extra = {{"M", kSensorCounts}, {"omega", omegas}, {"detector", "dp"}, {"cost_mode", "throughput"}};
    return t;
}

Table perror_vs_m(const Runner& r) {
    Table t{{"M", "p_error_bs", "p_error_dp", "stderr_bs", "stderr_dp", "trials", "seed"}};
    for (int M : kSensorCounts) {
        const ScenarioConfig c = r.sized(M);
        const SimMetrics bs = r.run(c, DetectorKind::BS, CostMode::ErrorMin);
        const SimMetrics dp = r.run(c, DetectorKind::DP, CostMode::ErrorMin);
        t.rows.push_back({num(M), num(bs.p_error()), num(dp.p_error()), num(bs.p_error_stderr()),
                          num(dp.p_error_stderr()), r.trials(), r.seed()});
    }
    t.extra = {{"M", kSensorCounts}, {"cost_mode_dp", "error-min"}};
    return t;
}

Table probed_vs_m(const Runner& r) {
    Table t{{"M", "probed_bs", "probed_dp_error", "probed_dp_throughput", "stderr_bs",
             "stderr_dp_error", "stderr_dp_throughput", "trials", "seed"}};
    for (int M : kSensorCounts) {
        const ScenarioConfig c = r.sized(M);
        const SimMetrics bs = r.run(c, DetectorKind::BS, CostMode::ErrorMin);
        const SimMetrics de = r.run(c, DetectorKind::DP, CostMode::ErrorMin);
        const SimMetrics dt = r.run(c, DetectorKind::DP, CostMode::WeightedThroughput);
        t.rows.push_back({num(M), num(bs.avg_stage()), num(de.avg_stage()), num(dt.avg_stage()),
                          num(bs.avg_stage_stderr()), num(de.avg_stage_stderr()),
                          num(dt.avg_stage_stderr()), r.trials(), r.seed()});
    }
    t.extra = {{"M", kSensorCounts}};
    return t;
}

Table throughput_compare(const Runner& r) {
    Table t{{"M", "weighted_bs", "weighted_dp_error", "weighted_dp_throughput", "secondary_bs",
             "secondary_dp_error", "secondary_dp_throughput", "primary_bs", "primary_dp_error",
             "primary_dp_throughput", "trials", "seed"}};
    const double w = r.bundle().costs.omega;
    auto weighted = [w](const SimMetrics& m) {
        return w * m.norm_throughput_primary() + (1 - w) * m.norm_throughput_secondary();
    };
    for (int M : kSensorCounts) {
        const ScenarioConfig c = r.sized(M);
        const CostModel tp = r.with_mode(CostMode::WeightedThroughput);
        const SimMetrics bs = r.run(c, DetectorKind::BS, tp);
        const SimMetrics de = r.run(c, DetectorKind::DP, CostMode::ErrorMin);
        const SimMetrics dt = r.run(c, DetectorKind::DP, tp);
        t.rows.push_back({num(M), num(weighted(bs)), num(weighted(de)), num(weighted(dt)),
                          num(bs.norm_throughput_secondary()), num(de.norm_throughput_secondary()),
                          num(dt.norm_throughput_secondary()), num(bs.norm_throughput_primary()),
                          num(de.norm_throughput_primary()), num(dt.norm_throughput_primary()),
                          r.trials(), r.seed()});
    }
    t.extra = {{"M", kSensorCounts}, {"omega", w}};
    return t;
}

Table probed_vs_k(const Runner& r) {
    Table t{{"case", "K", "avg_probed", "stderr_probed", "half_K", "p_error", "trials", "seed"}};
    const std::vector<int> ks = {2, 4, 6, 8, 10, 12, 14, 16};
    ScenarioConfig base = with_sensor_count(r.bundle().scenario, 100);
    // room for the largest K inside the slot
    base.tau = (base.tau_s - base.tau_N) / ks.back();
    struct Case {
        std::string name;
        double power;
        MeasurementModel model;
    };
    const std::vector<Case> cases = {{"low-snr", 2.0, MeasurementModel::EnergyChiSquare},
                                     {"high-snr", 50.0, MeasurementModel::EnergyChiSquare},
                                     {"shift-in-mean", 2.0, MeasurementModel::ShiftInMeanGaussian}};
    for (const auto& cs : cases) {
        for (int K : ks) {
            ScenarioConfig c = base;
            c.K = K;
            c.model = cs.model;
            c.sigma2_s.assign(c.M, cs.power);
            c.mu.clear();
            if (cs.model == MeasurementModel::ShiftInMeanGaussian) c.mu.assign(c.M, std::sqrt(cs.power));
            const SimMetrics m = r.run(c, DetectorKind::BS, CostMode::ErrorMin);
            t.rows.push_back({cs.name, num(K), num(m.avg_stage()), num(m.avg_stage_stderr()),
                              num(0.5 * K), num(m.p_error()), r.trials(), r.seed()});
        }
    }
    t.extra = {{"M", 100}, {"K", ks}, {"tau", base.tau}, {"detector", "bs"},
               {"cases", {{"low-snr", "energy, sigma2_s=2"},
                          {"high-snr", "energy, sigma2_s=50"},
                          {"shift-in-mean", "mu_i=sqrt(2)"}}}};
    return t;
}

Table fading_probed(const Runner& r) {
    Table t{{"M", "sensing_time_no_fading", "sensing_time_fading", "probed_no_fading",
             "probed_fading", "stderr_no_fading", "stderr_fading", "p_error_no_fading",
             "p_error_fading", "mean_participants", "trials", "seed"}};
    const FadingConfig fading = r.bundle().fading.value_or(FadingConfig{});
    MonteCarloOptions with = r.options();
    with.fading = fading;
    for (int M : kSensorCounts) {
        const ScenarioConfig c = r.sized(M);
        const SimMetrics plain = r.run(c, DetectorKind::DP, CostMode::ErrorMin);
        const SimMetrics faded = r.run(c, DetectorKind::DP, CostMode::ErrorMin, &with);
        double mean = 0.0;
        for (int i = 0; i < M; ++i) mean += participation_prob(i, fading);
        t.rows.push_back({num(M), num(plain.avg_sensing_time()), num(faded.avg_sensing_time()),
                          num(plain.avg_stage()), num(faded.avg_stage()),
                          num(plain.avg_stage_stderr()), num(faded.avg_stage_stderr()),
                          num(plain.p_error()), num(faded.p_error()), num(mean), r.trials(),
                          r.seed()});
    }
    t.extra = {{"M", kSensorCounts}, {"fading", fading_json(fading)}, {"detector", "dp"},
               {"cost_mode", "error-min"}};
    return t;
}

Table thresholds_vs_stage(const Runner& r) {
    Table t{{"c", "k", "pi_low", "pi_high", "llr_low", "llr_high"}};
    const std::vector<double> cs = {0.0, 1e-4, 1e-3};
    const ScenarioConfig& c = r.bundle().scenario;
    const SensorEnsemble ens = SensorEnsemble::from_config(c);
    SolverOptions opt;
    opt.grid_size = r.bundle().experiment.grid_size;
    for (double cost : cs) {
        CostModel costs = r.with_mode(CostMode::WeightedThroughput);
        costs.c = cost;
        const PolicyTable p = solve_backward(c, costs, ens, opt);
        for (int k = 1; k <= c.K; ++k) {
            const StagePolicy& s = p.stage(k);
            // H0 is declared at high belief, which is low accumulated LLR
            t.rows.push_back({num(cost), num(k), num(s.pi_low), num(s.pi_high),
                              num(belief_to_llr(std::min(s.pi_high, 1.0), c.pi0)),
                              num(belief_to_llr(s.pi_low, c.pi0))});
        }
    }
    t.extra = {{"c", cs}, {"cost_mode", "throughput"},
               {"llr_mapping", "log(pi0/(1-pi0)) + log((1-pi)/pi)"}};
    return t;
}

Table sensing_vs_c(const Runner& r) {
    Table t{{"c", "avg_sensing_time", "stderr_sensing_time", "avg_probed", "p_error",
             "throughput_secondary", "trials", "seed"}};
    const std::vector<double> cs = {0.0, 1e-5, 2e-5, 5e-5, 1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2};
    ScenarioConfig c = with_sensor_count(r.bundle().scenario, 8);
    c.K = 8;
    for (double cost : cs) {
        CostModel costs = r.with_mode(CostMode::ErrorMin);
        costs.c = cost;
        const SimMetrics m = r.run(c, DetectorKind::DP, costs);
        t.rows.push_back({num(cost), num(m.avg_sensing_time()), num(c.tau * m.avg_stage_stderr()),
                          num(m.avg_stage()), num(m.p_error()), num(m.norm_throughput_secondary()),
                          r.trials(), r.seed()});
    }
    t.extra = {{"c", cs}, {"M", 8}, {"K", 8}, {"cost_mode", "error-min"}};
    return t;
}

Table custom(const Runner& r) {
    Table t{{"detector", "M", "K", "p_error", "stderr_p_error", "avg_probed", "stderr_probed",
             "avg_sensing_time", "throughput_secondary", "stderr_secondary", "throughput_primary",
             "stderr_primary", "prior_only_slots", "stage_histogram", "trials", "seed"}};
    const ConfigBundle& b = r.bundle();
    MonteCarloOptions opts = r.options();
    opts.fading = b.fading;
    const SimMetrics m = r.run(b.scenario, b.experiment.detector, b.costs, &opts);
    std::string hist;
    for (long n : m.stage_histogram()) hist += (hist.empty() ? "" : ";") + num(n);
    t.rows.push_back({detector_name(b.experiment.detector), num(b.scenario.M), num(b.scenario.K),
                      num(m.p_error()), num(m.p_error_stderr()), num(m.avg_stage()),
                      num(m.avg_stage_stderr()), num(m.avg_sensing_time()),
                      num(m.norm_throughput_secondary()), num(m.norm_throughput_secondary_stderr()),
                      num(m.norm_throughput_primary()), num(m.norm_throughput_primary_stderr()),
                      num(m.prior_only()), hist, r.trials(), r.seed()});
    return t;
}

const std::map<std::string, std::function<Table(const Runner&)>>& presets() {
    static const std::map<std::string, std::function<Table(const Runner&)>> p = {
        {"fig-throughput-vs-M", throughput_vs_m},
        {"fig-perror-vs-M", perror_vs_m},
        {"fig-probed-vs-M", probed_vs_m},
        {"fig-throughput-compare", throughput_compare},
        {"fig-probed-vs-K", probed_vs_k},
        {"fig-fading-probed", fading_probed},
        {"fig-thresholds-vs-stage", thresholds_vs_stage},
        {"fig-sensing-vs-c", sensing_vs_c},
        {"custom", custom},
    };
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    out.close();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : presets()) names.push_back(name);
    return names;
}

std::vector<std::string> run_experiment(const ConfigBundle& bundle) {
    const ExperimentSpec& spec = bundle.experiment;
    spec.validate();
    const auto it = presets().find(spec.preset);
    if (it == presets().end()) throw ConfigError("unknown preset '" + spec.preset + "'");

    const Runner runner(bundle);
    const Table table = it->second(runner);

    std::string csv;
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        csv += (i ? "," : "") + csv_field(table.columns[i]);
    csv += "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) csv += (i ? "," : "") + csv_field(row[i]);
        csv += "\r\n";
    }

    json meta = {{"preset", spec.preset},
                 {"trials", spec.trials},
                 {"seed", spec.seed},
                 {"detector", detector_name(spec.detector)},
                 {"grid_size", spec.grid_size},
                 {"columns", table.columns},
                 {"scenario", scenario_json(bundle.scenario)},
                 {"cost", cost_json(bundle.costs)},
                 {"fading", bundle.fading ? fading_json(*bundle.fading) : json(nullptr)},
                 {"preset_settings", table.extra},
                 {"config_keys_set", spec.overrides}};

    std::error_code ec;
    fs::create_directories(spec.output, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + spec.output + ": " + ec.message());
    const fs::path csv_path = fs::path(spec.output) / (spec.preset + ".csv");
    const fs::path meta_path = fs::path(spec.output) / (spec.preset + ".csv.meta.json");
    write_text(csv_path, csv);
    write_text(meta_path, meta.dump(2) + "\n");
    return {csv_path.string(), meta_path.string()};
}

} // namespace ordfuse
