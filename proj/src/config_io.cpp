#include "ordfuse/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ordfuse/errors.hpp"

namespace ordfuse {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"scenario",
         {"M", "N", "K", "tau_s", "tau_N", "tau", "pi0", "sigma2", "sigma2_s", "model", "mu",
          "rng_seed"}},
        {"cost",
         {"mode", "omega", "R_p", "R_s", "eta_p", "eta_s", "delta_p", "delta_s", "e_pt", "e_st", "P",
          "L_f", "L_b", "c"}},
        {"fading",
         {"enabled", "W", "bits", "tau_b", "time_unit", "T_c", "P_over_sigma", "Gamma", "gain_mean"}},
        {"experiment", {"preset", "trials", "detector", "grid_size", "threads", "output"}},
    };
    return keys;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

class Reader {
public:
    Reader(const pt::ptree& tree, std::string source) : tree_(tree), source_(std::move(source)) {}

    const std::string* raw(const std::string& section, const std::string& key) {
        auto sec = tree_.get_child_optional(section);
        if (!sec) return nullptr;
        auto v = sec->get_child_optional(key);
        if (!v) return nullptr;
        const std::string name = section + "." + key;
        seen_[name] = trim(v->data());
        return &seen_[name];
    }

    double number(const std::string& section, const std::string& key, double fallback) {
        const std::string* s = raw(section, key);
        return s ? parse_number(section, key, *s) : fallback;
    }

    long integer(const std::string& section, const std::string& key, long fallback) {
        const std::string* s = raw(section, key);
        if (!s) return fallback;
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(*s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s->size()) fail(section, key, "expected an integer, got '" + *s + "'");
        return v;
    }

    std::vector<double> list(const std::string& section, const std::string& key) {
        const std::string* s = raw(section, key);
        if (!s) return {};
        std::vector<double> out;
        std::stringstream in(*s);
        std::string item;
        while (std::getline(in, item, ',')) out.push_back(parse_number(section, key, trim(item)));
        if (out.empty()) fail(section, key, "empty list");
        return out;
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback) {
        const std::string* s = raw(section, key);
        return s ? *s : fallback;
    }

    bool flag(const std::string& section, const std::string& key, bool fallback) {
        const std::string* s = raw(section, key);
        if (!s) return fallback;
        if (*s == "true" || *s == "1" || *s == "yes") return true;
        if (*s == "false" || *s == "0" || *s == "no") return false;
        fail(section, key, "expected true or false, got '" + *s + "'");
    }

    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) {
        throw ConfigError(source_ + ": [" + section + "] " + key + ": " + what);
    }

    const std::map<std::string, std::string>& seen() const { return seen_; }

private:
    double parse_number(const std::string& section, const std::string& key, const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(v))
            fail(section, key, "expected a number, got '" + s + "'");
        return v;
    }

    const pt::ptree& tree_;
    std::string source_;
    std::map<std::string, std::string> seen_;
};

void reject_unknown(const pt::ptree& tree, const std::string& source) {
    const auto& keys = known_keys();
    for (const auto& [section, body] : tree) {
        auto it = keys.find(section);
        if (it == keys.end()) {
            if (body.empty())
                throw ConfigError(source + ": key '" + section + "' outside any section");
            throw ConfigError(source + ": unknown section [" + section + "]");
        }
        for (const auto& [key, value] : body) {
            if (!it->second.count(key))
                throw ConfigError(source + ": unknown key '" + key + "' in [" + section + "]");
        }
    }
}

} // namespace

std::optional<DetectorKind> parse_detector(const std::string& name) {
    for (auto k : {DetectorKind::BS, DetectorKind::BSGeneralized, DetectorKind::DP,
                   DetectorKind::OneThreshold, DetectorKind::BlockMAP, DetectorKind::Genie,
                   DetectorKind::PriorOnly}) {
        if (detector_name(k) == name) return k;
    }
    return std::nullopt;
}

void ExperimentSpec::validate() const {
    static const std::set<std::string> presets = {
        "fig-throughput-vs-M", "fig-perror-vs-M",   "fig-probed-vs-M",
        "fig-throughput-compare", "fig-probed-vs-K", "fig-fading-probed",
        "fig-thresholds-vs-stage", "fig-sensing-vs-c", "custom"};
    if (!presets.count(preset)) throw ConfigError("unknown preset '" + preset + "'");
    if (trials < 1) throw ConfigError("experiment invariant violated: trials >= 1");
    if (grid_size < 101) throw ConfigError("experiment invariant violated: grid_size >= 101");
}

ConfigBundle parse_config(const std::string& text, const std::string& source) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    reject_unknown(tree, source);
    Reader r(tree, source);
    ConfigBundle b;

    ScenarioConfig& s = b.scenario;
    s.M = static_cast<int>(r.integer("scenario", "M", s.M));
    s.N = static_cast<int>(r.integer("scenario", "N", s.N));
    s.K = static_cast<int>(r.integer("scenario", "K", s.K));
    s.tau_s = r.number("scenario", "tau_s", s.tau_s);
    s.tau_N = r.number("scenario", "tau_N", s.tau_N);
    s.tau = r.number("scenario", "tau", s.tau);
    s.pi0 = r.number("scenario", "pi0", s.pi0);
    s.sigma2 = r.number("scenario", "sigma2", s.sigma2);
    const long seed = r.integer("scenario", "rng_seed", 1);
    if (seed < 0) r.fail("scenario", "rng_seed", "must be non-negative");
    s.rng_seed = static_cast<std::uint64_t>(seed);
    if (s.M < 1) throw ConfigError("scenario invariant violated: M >= K >= 1");
    std::vector<double> powers = r.list("scenario", "sigma2_s");
    if (powers.empty()) powers = {2.0};
    s.sigma2_s = powers.size() == 1 ? std::vector<double>(s.M, powers.front()) : powers;
    const std::string model = r.text("scenario", "model", "energy");
    if (model == "energy") {
        s.model = MeasurementModel::EnergyChiSquare;
    } else if (model == "shift-in-mean") {
        s.model = MeasurementModel::ShiftInMeanGaussian;
        std::vector<double> mu = r.list("scenario", "mu");
        if (mu.empty()) {
            for (double p : s.sigma2_s) mu.push_back(std::sqrt(std::max(p, 0.0)));
        } else if (mu.size() == 1) {
            mu.assign(s.M, mu.front());
        }
        s.mu = mu;
    } else {
        r.fail("scenario", "model", "expected energy or shift-in-mean, got '" + model + "'");
    }
    s.validate();

    CostModel& c = b.costs;
    const std::string mode = r.text("cost", "mode", "error-min");
    if (mode == "error-min") c.mode = CostMode::ErrorMin;
    else if (mode == "throughput") c.mode = CostMode::WeightedThroughput;
    else r.fail("cost", "mode", "expected error-min or throughput, got '" + mode + "'");
    c.omega = r.number("cost", "omega", c.omega);
    c.R_p = r.number("cost", "R_p", c.R_p);
    c.R_s = r.number("cost", "R_s", c.R_s);
    c.eta_p = r.number("cost", "eta_p", c.eta_p);
    c.eta_s = r.number("cost", "eta_s", c.eta_s);
    c.delta_p = r.number("cost", "delta_p", c.delta_p);
    c.delta_s = r.number("cost", "delta_s", c.delta_s);
    c.e_pt = r.number("cost", "e_pt", c.e_pt);
    c.e_st = r.number("cost", "e_st", c.e_st);
    c.P_col = r.number("cost", "P", c.P_col);
    c.L_f = r.number("cost", "L_f", c.L_f);
    c.L_b = r.number("cost", "L_b", c.L_b);
    c.c = r.number("cost", "c", c.c);
    c.validate();

    const bool fading_section = static_cast<bool>(tree.get_child_optional("fading"));
    if (r.flag("fading", "enabled", fading_section)) {
        FadingConfig f;
        f.W = r.number("fading", "W", f.W);
        f.bits = r.number("fading", "bits", f.bits);
        f.tau_b = r.number("fading", "tau_b", f.tau_b);
        f.time_unit = r.number("fading", "time_unit", f.time_unit);
        f.T_c = static_cast<int>(r.integer("fading", "T_c", f.T_c));
        if (auto v = r.list("fading", "P_over_sigma"); !v.empty()) f.P_over_sigma = v;
        if (auto v = r.list("fading", "Gamma"); !v.empty()) f.Gamma = v;
        if (auto v = r.list("fading", "gain_mean"); !v.empty()) {
            f.gain.clear();
            for (double m : v) f.gain.push_back(GainLaw::exponential(m));
        }
        for (std::size_t n : {f.P_over_sigma.size(), f.Gamma.size(), f.gain.size()}) {
            if (n != 1 && static_cast<int>(n) != s.M)
                throw ConfigError("fading invariant violated: per-sensor lists have 1 or M entries");
        }
        f.validate(s.tau);
        b.fading = f;
    }

    ExperimentSpec& e = b.experiment;
    e.preset = r.text("experiment", "preset", e.preset);
    e.trials = r.integer("experiment", "trials", e.trials);
    e.seed = s.rng_seed;
    e.output = r.text("experiment", "output", e.output);
    const std::string det = r.text("experiment", "detector", detector_name(e.detector));
    if (auto k = parse_detector(det)) e.detector = *k;
    else r.fail("experiment", "detector", "unknown detector '" + det + "'");
    e.grid_size = static_cast<int>(r.integer("experiment", "grid_size", e.grid_size));
    const long threads = r.integer("experiment", "threads", 0);
    if (threads < 0) r.fail("experiment", "threads", "must be non-negative");
    e.threads = static_cast<unsigned>(threads);
    e.overrides = r.seen();
    e.validate();
    return b;
}

ConfigBundle load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

} // namespace ordfuse
