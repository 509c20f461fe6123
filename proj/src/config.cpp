#include "qdpg/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace qdpg {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool consumed = false;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Sections parse_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError(file.string() + ": cannot open config file");
    Sections sections;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(file.string() + ":" + std::to_string(line_no) +
                                  ": malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(file.string() + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": empty key");
        auto [it, inserted] = sections[section].emplace(key, Entry{value, line_no});
        if (!inserted)
            throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": duplicate key '" +
                              key + "' in [" + section + "]");
    }
    return sections;
}

class ConfigReader {
public:
    ConfigReader(const std::filesystem::path& file, Sections sections)
        : file_(file.string()), sections_(std::move(sections)) {}

    template <typename T, typename ParseFn>
    bool get(const std::string& section, const std::string& key, T& out, ParseFn parse) {
        auto sit = sections_.find(section);
        if (sit == sections_.end()) return false;
        auto kit = sit->second.find(key);
        if (kit == sit->second.end()) return false;
        kit->second.consumed = true;
        try {
            out = parse(kit->second.value);
        } catch (const std::exception& e) {
            throw ConfigError(file_ + ":" + std::to_string(kit->second.line) + ": bad value for '" +
                              key + "': " + e.what());
        }
        return true;
    }

    void require(const std::string& section, const std::string& key) const {
        auto sit = sections_.find(section);
        if (sit == sections_.end() || !sit->second.count(key))
            throw ConfigError(file_ + ": missing required field '" + key + "' in [" + section +
                              "]");
    }

    void reject_unknown() const {
        for (const auto& [section, entries] : sections_)
            for (const auto& [key, entry] : entries)
                if (!entry.consumed)
                    throw ConfigError(file_ + ":" + std::to_string(entry.line) +
                                      ": unknown key '" + key + "' in [" + section + "]");
    }

private:
    std::string file_;
    Sections sections_;
};

std::string parse_string(const std::string& v) { return v; }

bool parse_bool(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw std::invalid_argument("expected true or false, got '" + v + "'");
}

long long parse_int(const std::string& v) {
    long long x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw std::invalid_argument("expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& v) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw std::invalid_argument("expected an unsigned integer, got '" + v + "'");
    return x;
}

double parse_double(const std::string& v) {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
    return x;
}

std::vector<int> parse_int_list(const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(static_cast<int>(parse_int(trim(item))));
    if (out.empty()) throw std::invalid_argument("expected a comma-separated integer list");
    return out;
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& file) {
    ConfigReader reader(file, parse_file(file));
    RunConfig cfg;

    for (const char* key : {"task", "algorithm", "eval_budget", "master_seed", "n_replications"})
        reader.require("run", key);

    std::string algorithm;
    reader.get("run", "task", cfg.task, parse_string);
    reader.get("run", "uncertain", cfg.uncertain, parse_bool);
    reader.get("run", "algorithm", algorithm, parse_string);
    cfg.algo.algorithm = parse_algorithm(algorithm);
    long long budget = 0;
    reader.get("run", "eval_budget", budget, parse_int);
    cfg.algo.eval_budget = budget;
    reader.get("run", "master_seed", cfg.master_seed, parse_u64);
    long long reps = 0;
    reader.get("run", "n_replications", reps, parse_int);
    cfg.n_replications = static_cast<int>(reps);
    reader.get("run", "out_dir", cfg.out_dir, parse_string);
    long long tmp = 0;
    if (reader.get("run", "correct_reevals", tmp, parse_int))
        cfg.correct_reevals = static_cast<int>(tmp);

    if (reader.get("archive", "n_centroids", tmp, parse_int)) cfg.n_centroids = static_cast<int>(tmp);
    if (reader.get("archive", "cvt_samples", tmp, parse_int)) cfg.cvt_samples = static_cast<int>(tmp);
    if (reader.get("archive", "deep_depth", tmp, parse_int)) cfg.algo.deep_depth = static_cast<int>(tmp);

    if (reader.get("loop", "batch_size", tmp, parse_int))
        cfg.algo.variation.batch_size = static_cast<int>(tmp);
    if (reader.get("loop", "n_init_episodes", tmp, parse_int))
        cfg.algo.n_init_episodes = static_cast<int>(tmp);
    if (reader.get("loop", "n_crit", tmp, parse_int)) cfg.algo.n_crit = static_cast<int>(tmp);
    if (reader.get("loop", "sampling_m", tmp, parse_int))
        cfg.algo.sampling_m = static_cast<int>(tmp);

    reader.get("network", "actor_hidden", cfg.algo.actor_hidden, parse_int_list);
    reader.get("network", "critic_hidden", cfg.algo.critic_hidden, parse_int_list);

    Td3Config& td3 = cfg.algo.td3;
    reader.get("td3", "gamma", td3.gamma, parse_double);
    reader.get("td3", "tau", td3.tau, parse_double);
    if (reader.get("td3", "policy_delay", tmp, parse_int)) td3.policy_delay = static_cast<int>(tmp);
    reader.get("td3", "smoothing_sigma", td3.smoothing_sigma, parse_double);
    reader.get("td3", "smoothing_clip", td3.smoothing_clip, parse_double);
    reader.get("td3", "exploration_sigma", td3.exploration_sigma, parse_double);
    if (reader.get("td3", "train_batch", tmp, parse_int)) td3.train_batch = static_cast<int>(tmp);
    reader.get("td3", "lr_critic", td3.lr_critic, parse_double);
    reader.get("td3", "lr_greedy", td3.lr_greedy, parse_double);
    if (reader.get("td3", "warmup_steps", tmp, parse_int))
        cfg.algo.td3_warmup_steps = static_cast<int>(tmp);
    long long cap = 0;
    if (reader.get("td3", "replay_capacity", cap, parse_int))
        cfg.algo.replay_capacity = static_cast<std::size_t>(cap);

    VariationConfig& var = cfg.algo.variation;
    reader.get("variation", "sigma1", var.sigma1, parse_double);
    reader.get("variation", "sigma2", var.sigma2, parse_double);
    if (reader.get("variation", "n_act", tmp, parse_int)) var.n_act = static_cast<int>(tmp);
    reader.get("variation", "lr_pg", var.lr_pg, parse_double);
    if (reader.get("variation", "pg_batch", tmp, parse_int)) var.pg_batch = static_cast<int>(tmp);
    reader.get("variation", "proportion_ga", var.proportion_ga, parse_double);

    reader.reject_unknown();

    if (cfg.n_replications < 1) throw ConfigError(file.string() + ": n_replications must be >= 1");
    if (cfg.algo.eval_budget < cfg.algo.variation.batch_size)
        throw ConfigError(file.string() + ": eval_budget must cover at least one batch");
    if (var.proportion_ga < 0.0 || var.proportion_ga > 1.0)
        throw ConfigError(file.string() + ": proportion_ga must be in [0,1]");
    if (cfg.n_centroids < 1) throw ConfigError(file.string() + ": n_centroids must be >= 1");
    if (cfg.algo.variation.batch_size < 1 || cfg.algo.n_init_episodes < 1 ||
        cfg.algo.n_crit < 1 || cfg.algo.sampling_m < 1 || cfg.algo.deep_depth < 1)
        throw ConfigError(file.string() +
                          ": batch_size, n_init_episodes, n_crit, sampling_m and deep_depth "
                          "must all be positive");
    if (var.n_act < 0) throw ConfigError(file.string() + ": n_act must be >= 0");
    return cfg;
}

} // namespace qdpg
