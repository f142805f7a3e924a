#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "precis/precis.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;

// Raised for input errors; main() prints it and exits 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config file as a JSON object: keys are long option names without the
// dashes ('_' and '-' both accepted), values scalars or arrays. Top-level
// keys belong to the command being run; nested objects name a command.
class JsonConfig : public CLI::Config {
public:
    std::vector<std::string> command;

    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        json j;
        for (const CLI::Option* opt : app->get_options({})) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) {
                continue;
            }
            const std::string name = opt->get_lnames()[0];
            if (opt->count() > 0) {
                j[name] = opt->as<std::string>();
            } else if (default_also && !opt->get_default_str().empty()) {
                j[name] = opt->get_default_str();
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        try {
            input >> j;
        } catch (const json::exception& e) {
            throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) {
            throw CLI::ConversionError("config file must hold a JSON object");
        }
        std::vector<CLI::ConfigItem> items;
        collect(j, command, items);
        return items;
    }

private:
    static void collect(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                std::vector<std::string> sub = {key};
                collect(value, sub, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            for (auto& c : item.name) {
                c = c == '_' ? '-' : c;
            }
            if (value.is_array()) {
                for (const auto& v : value) {
                    item.inputs.push_back(scalar(v, key));
                }
            } else {
                item.inputs.push_back(scalar(value, key));
            }
            items.push_back(std::move(item));
        }
    }

    static std::string scalar(const json& v, const std::string& key) {
        if (v.is_string()) {
            return v.get<std::string>();
        }
        if (v.is_boolean()) {
            return v.get<bool>() ? "true" : "false";
        }
        if (v.is_number()) {
            return v.dump();
        }
        throw CLI::ConversionError("config key '" + key + "' must be a scalar or an array of scalars");
    }
};

// ---- RAII wrappers over the C handles

struct PlantDeleter {
    void operator()(precis_plant* p) const { precis_plant_free(p); }
};
struct OptionsDeleter {
    void operator()(precis_options* p) const { precis_options_free(p); }
};
struct ResultDeleter {
    void operator()(precis_result* p) const { precis_result_free(p); }
};
struct SelectionDeleter {
    void operator()(precis_selection* p) const { precis_selection_free(p); }
};
using Plant = std::unique_ptr<precis_plant, PlantDeleter>;
using Options = std::unique_ptr<precis_options, OptionsDeleter>;
using Result = std::unique_ptr<precis_result, ResultDeleter>;
using Selection = std::unique_ptr<precis_selection, SelectionDeleter>;

// Library failure carrying its status, mapped to an exit code in main().
struct ApiError : std::runtime_error {
    precis_status status;
    ApiError(precis_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(precis_status s, const std::string& context) {
    if (s != PRECIS_OK) {
        std::string msg = precis_last_error();
        if (msg.empty()) {
            msg = precis_status_string(s);
        }
        throw ApiError(s, context + ": " + msg);
    }
}

int exit_code_for(precis_status s) {
    switch (s) {
        case PRECIS_E_INFEASIBLE:
        case PRECIS_E_RECOVERY:
            return kExitInfeasible;
        default:
            return kExitInput;
    }
}

std::string fmt(double x) {
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

template <class T>
T parse_number(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    T v{};
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw UsageError(what + ": '" + text + "' is not a number");
    }
    return v;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what, char sep = ',') {
    std::vector<T> out;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
        out.push_back(parse_number<T>(tok, what));
    }
    if (out.empty()) {
        throw UsageError(what + ": no values");
    }
    return out;
}

// 1-based ids as typed by the user; converted to 0-based here only.
std::vector<int> parse_user_subset(const std::string& text, int ns) {
    std::vector<int> ids;
    for (int id : parse_list<int>(text, "--subset")) {
        if (id < 1 || id > ns) {
            throw UsageError("--subset: sensor " + std::to_string(id) + " is outside 1.." + std::to_string(ns));
        }
        ids.push_back(id - 1);
    }
    return ids;
}

std::string user_subset(const std::vector<int>& ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        s += (i ? "," : "") + std::to_string(ids[i] + 1);
    }
    return s;
}

// ---- shared option groups

struct PlantArgs {
    std::string builtin;
    std::string file;

    void add(CLI::App* app) {
        auto* b = app->add_option("--builtin", builtin, "example1 | spring-mass:M | random:SEED,NX,ND,NS");
        auto* f = app->add_option("--plant", file, "plant file (matrix sections A, B_d, C_z, C_y, D_d, weights)");
        b->excludes(f);
    }

    [[nodiscard]] Plant load() const {
        precis_plant* raw = nullptr;
        if (!file.empty()) {
            check(precis_plant_load(file.c_str(), &raw), "--plant");
        } else if (builtin.empty()) {
            throw UsageError("one of --builtin or --plant is required");
        } else if (builtin == "example1") {
            check(precis_plant_example1(&raw), "--builtin");
        } else if (builtin.rfind("spring-mass:", 0) == 0) {
            const int m = parse_number<int>(builtin.substr(12), "--builtin spring-mass");
            check(precis_plant_spring_mass(m, &raw), "--builtin");
        } else if (builtin.rfind("random:", 0) == 0) {
            const auto v = parse_list<long long>(builtin.substr(7), "--builtin random");
            if (v.size() != 4 || v[0] < 0) {
                throw UsageError("--builtin random: expected random:SEED,NX,ND,NS");
            }
            check(precis_plant_random(static_cast<uint64_t>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
                                      static_cast<int>(v[3]), &raw),
                  "--builtin");
        } else {
            throw UsageError("--builtin: unknown plant '" + builtin + "'");
        }
        return Plant(raw);
    }
};

struct DesignArgs {
    std::string framework = "hinf";
    std::string estimator = "observer";
    std::optional<double> gamma;
    std::string rho;
    std::string rho_file;

    void add(CLI::App* app, bool gamma_required) {
        app->add_option("--framework", framework, "hinf | h2")->capture_default_str();
        app->add_option("--estimator", estimator, "observer | filter")->capture_default_str();
        auto* g = app->add_option("--gamma", gamma, "performance bound (> 0)");
        if (gamma_required) {
            g->required();
        }
        auto* r = app->add_option("--rho", rho, "sensor weights: one value for all, or one per catalog sensor");
        auto* rf = app->add_option("--rho-file", rho_file, "file with one weight per catalog sensor");
        r->excludes(rf);
    }

    void apply(precis_options* o, int ns) const {
        check(precis_options_set_framework(o, framework.c_str()), "--framework");
        check(precis_options_set_estimator(o, estimator.c_str()), "--estimator");
        if (gamma) {
            if (!(*gamma > 0.0)) {
                throw UsageError("--gamma must be positive");
            }
            check(precis_options_set_gamma(o, *gamma), "--gamma");
        }
        std::vector<double> w;
        if (!rho.empty()) {
            w = parse_list<double>(rho, "--rho");
            if (w.size() == 1) {
                w.assign(static_cast<std::size_t>(ns), w[0]);
            }
        } else if (!rho_file.empty()) {
            std::ifstream in(rho_file);
            if (!in) {
                throw UsageError("--rho-file: cannot open " + rho_file);
            }
            std::string line;
            while (std::getline(in, line)) {
                line = trim(line.substr(0, line.find('#')));
                std::replace(line.begin(), line.end(), ',', ' ');
                std::istringstream ls(line);
                std::string tok;
                while (ls >> tok) {
                    w.push_back(parse_number<double>(tok, "--rho-file"));
                }
            }
        }
        if (!w.empty()) {
            if (static_cast<int>(w.size()) != ns) {
                throw UsageError("--rho: expected 1 or " + std::to_string(ns) + " values, got " +
                                 std::to_string(w.size()));
            }
            check(precis_options_set_rho(o, w.data(), static_cast<int>(w.size())), "--rho");
        }
    }
};

struct SolverArgs {
    std::optional<double> mu, eps_abs, eps_rel, eps_p, eps_h, margin_factor;
    std::optional<int> max_iter;
    std::string mode;

    void add(CLI::App* app) {
        const char* group = "Solver";
        app->add_option("--mu", mu, "penalty parameter")->group(group);
        app->add_option("--eps-abs", eps_abs, "absolute stopping tolerance")->group(group);
        app->add_option("--eps-rel", eps_rel, "relative stopping tolerance")->group(group);
        app->add_option("--max-iter", max_iter, "iteration cap")->group(group);
        app->add_option("--eps-p", eps_p, "precision floor")->group(group);
        app->add_option("--eps-h", eps_h, "slack eigenvalue floor")->group(group);
        app->add_option("--margin-factor", margin_factor, "adaptive slack floor factor")->group(group);
        app->add_option("--mode", mode, "cone-slack | projected-least-squares | inner-admm")->group(group);
    }

    void apply(precis_options* o) const {
        auto set = [&](const char* key, const auto& v, const char* flag) {
            if (v) {
                check(precis_options_set_admm(o, key, static_cast<double>(*v)), flag);
            }
        };
        set("mu", mu, "--mu");
        set("eps_abs", eps_abs, "--eps-abs");
        set("eps_rel", eps_rel, "--eps-rel");
        set("max_iter", max_iter, "--max-iter");
        set("eps_p", eps_p, "--eps-p");
        set("eps_h", eps_h, "--eps-h");
        set("margin_factor", margin_factor, "--margin-factor");
        if (!mode.empty()) {
            check(precis_options_set_admm_mode(o, mode.c_str()), "--mode");
        }
    }
};

Options new_options() {
    precis_options* raw = nullptr;
    check(precis_options_create(&raw), "options");
    return Options(raw);
}

int sensor_count(const precis_plant* p) {
    int ns = 0;
    check(precis_plant_dims(p, nullptr, nullptr, nullptr, &ns), "plant");
    return ns;
}

fs::path prepare_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw UsageError("--out: cannot create " + dir + ": " + ec.message());
    }
    return fs::path(dir);
}

std::vector<int> result_subset(const precis_result* r) {
    int n = 0;
    precis_result_subset(r, nullptr, 0, &n);
    std::vector<int> ids(static_cast<std::size_t>(n));
    check(precis_result_subset(r, ids.data(), n, &n), "result");
    return ids;
}

std::vector<double> result_precisions(const precis_result* r) {
    int n = 0;
    precis_result_precisions(r, nullptr, 0, &n);
    std::vector<double> p(static_cast<std::size_t>(n));
    check(precis_result_precisions(r, p.data(), n, &n), "result");
    return p;
}

void print_result(const precis_result* r) {
    std::cout << "subset " << user_subset(result_subset(r)) << "\n";
    std::cout << "objective " << fmt(precis_result_objective(r)) << "\n";
    std::cout << "norm " << fmt(precis_result_norm(r)) << "\n";
    std::cout << "gamma " << fmt(precis_result_gamma(r)) << "\n";
    std::cout << "certified " << (precis_result_certified(r) ? "yes" : "no") << "\n";
    std::cout << "iterations " << precis_result_iterations(r) << " (" << precis_result_status(r) << ")\n";
    std::cout << "p";
    for (double v : result_precisions(r)) {
        std::cout << ' ' << fmt(v);
    }
    std::cout << "\n";
}

// ---- commands

struct Common {
    std::string out = ".";
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    void add(CLI::App* app) {
        app->add_option("--out", out, "output directory")->capture_default_str();
        app->add_option("--jobs", jobs, "worker cap")->envname("PRECIS_JOBS")->check(CLI::PositiveNumber);
    }
};

int cmd_design(const PlantArgs& plant_args, const DesignArgs& d, const SolverArgs& s, const Common& c,
               const std::string& subset_text) {
    const Plant plant = plant_args.load();
    const int ns = sensor_count(plant.get());
    const Options opt = new_options();
    d.apply(opt.get(), ns);
    s.apply(opt.get());
    check(precis_options_set_jobs(opt.get(), c.jobs), "--jobs");
    const std::vector<int> subset = subset_text.empty() ? std::vector<int>{} : parse_user_subset(subset_text, ns);
    const fs::path dir = prepare_out(c.out);
    const std::string trace = (dir / "trace.csv").string();
    precis_result* raw = nullptr;
    const precis_status st = precis_design(plant.get(), opt.get(), subset.data(), static_cast<int>(subset.size()),
                                           trace.c_str(), &raw);
    if (st != PRECIS_OK) {
        check(st, "design");
    }
    const Result r(raw);
    const std::string path = (dir / "result.txt").string();
    check(precis_result_save(r.get(), path.c_str()), "write result");
    print_result(r.get());
    std::cout << "wrote " << path << " and " << trace << "\n";
    return kExitOk;
}

int cmd_select(const PlantArgs& plant_args, const DesignArgs& d, const SolverArgs& s, const Common& c,
               const std::string& algorithm, int k, int i_max, double rlm_eps, long long budget) {
    const Plant plant = plant_args.load();
    const int ns = sensor_count(plant.get());
    if (k < 1 || k > ns) {
        throw UsageError("-k: must be between 1 and the catalog size " + std::to_string(ns));
    }
    const Options opt = new_options();
    d.apply(opt.get(), ns);
    s.apply(opt.get());
    check(precis_options_set_jobs(opt.get(), c.jobs), "--jobs");
    check(precis_options_set_rlm(opt.get(), i_max, rlm_eps), "--i-max");
    if (budget < 0) {
        throw UsageError("--budget must be non-negative");
    }
    check(precis_options_set_budget(opt.get(), static_cast<uint64_t>(budget)), "--budget");
    const fs::path dir = prepare_out(c.out);

    precis_selection* raw = nullptr;
    check(precis_select(plant.get(), opt.get(), algorithm.c_str(), k, &raw), "select");
    const Selection sel(raw);

    const bool feasible = precis_selection_feasible(sel.get()) != 0;
    int n = 0;
    precis_selection_subset(sel.get(), nullptr, 0, &n);
    std::vector<int> ids(static_cast<std::size_t>(n));
    check(precis_selection_subset(sel.get(), ids.data(), n, &n), "select");

    const std::string trace = (dir / "selection_trace.csv").string();
    check(precis_selection_write_trace(sel.get(), trace.c_str()), "write trace");
    const std::string summary = (dir / "selection.txt").string();
    std::ofstream os(summary);
    if (!os) {
        throw UsageError("cannot write " + summary);
    }
    std::ostringstream text;
    text << "algorithm " << algorithm << "\n";
    text << "k " << k << "\n";
    text << "feasible " << (feasible ? "yes" : "no") << "\n";
    text << "subset " << (feasible ? user_subset(ids) : "{}") << "\n";
    text << "cost " << fmt(precis_selection_cost(sel.get())) << "\n";
    text << "evaluations " << precis_selection_evaluations(sel.get()) << "\n";
    text << "solves " << precis_selection_solves(sel.get()) << "\n";
    text << "rounds " << precis_selection_rounds(sel.get()) << "\n";
    os << text.str();
    std::cout << text.str();

    if (feasible) {
        precis_result* rr = nullptr;
        check(precis_selection_design(sel.get(), &rr), "select");
        const Result r(rr);
        if (r) {
            const std::string path = (dir / "result.txt").string();
            check(precis_result_save(r.get(), path.c_str()), "write result");
        }
        return kExitOk;
    }
    std::cerr << "selection reached infeasibility\n";
    return kExitInfeasible;
}

int cmd_verify(const std::string& file, std::optional<double> gamma) {
    precis_result* raw = nullptr;
    check(precis_result_load(file.c_str(), &raw), "verify");
    const Result r(raw);
    if (gamma && !(*gamma > 0.0)) {
        throw UsageError("--gamma must be positive");
    }
    precis_verification v{};
    check(precis_verify(r.get(), gamma.value_or(0.0), &v), "verify");
    std::cout << "gamma " << fmt(v.gamma) << "\n";
    if (!v.stable) {
        std::vector<double> re(static_cast<std::size_t>(v.spectrum_size));
        std::vector<double> im(re.size());
        int n = 0;
        check(precis_result_spectrum(r.get(), re.data(), im.data(), v.spectrum_size, &n), "verify");
        std::cout << "unstable error system; spectrum:\n";
        for (int i = 0; i < n; ++i) {
            std::cout << "  " << fmt(re[static_cast<std::size_t>(i)]) << (im[static_cast<std::size_t>(i)] < 0 ? " - " : " + ")
                      << fmt(std::abs(im[static_cast<std::size_t>(i)])) << "i\n";
        }
        return kExitInfeasible;
    }
    std::cout << "norm " << fmt(v.norm) << "\n";
    std::cout << (v.within_bound ? "bound holds" : "bound violated") << "\n";
    return v.within_bound ? kExitOk : kExitInfeasible;
}

int cmd_bench_example1(const SolverArgs& s, const Common& c) {
    const Options opt = new_options();
    s.apply(opt.get());
    const fs::path dir = prepare_out(c.out);
    const std::string path = (dir / "example1.csv").string();
    precis_example1_summary sum{};
    check(precis_bench_example1(opt.get(), path.c_str(), &sum), "bench example1");
    std::cout << "rows passed " << sum.rows_passed << "/" << sum.rows << "\n";
    std::cout << "submodularity violated " << (sum.submodularity_violated ? "yes" : "no") << "\n";
    std::cout << "supermodularity violated " << (sum.supermodularity_violated ? "yes" : "no") << "\n";
    std::cout << "seconds " << fmt(sum.seconds) << "\n";
    std::cout << (sum.pass ? "PASS" : "FAIL") << "\n";
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

int cmd_bench_scaling(const std::string& masses_text, double gamma, int reps, const Common& c) {
    const auto masses = parse_list<int>(masses_text, "--masses");
    const fs::path dir = prepare_out(c.out);
    const std::string path = (dir / "scaling.csv").string();
    double slope = 0.0;
    check(precis_bench_scaling(masses.data(), static_cast<int>(masses.size()), gamma, reps, path.c_str(), &slope),
          "bench scaling");
    std::cout << "slope " << fmt(slope) << "\n";
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

void print_summary(const char* name, const precis_algorithm_summary& s) {
    std::cout << name << ": exact " << s.exact << ", infeasible " << s.infeasible << ", mean error "
              << fmt(s.mean_pct_error) << "% (sd " << fmt(s.sd_pct_error) << "%), mean evaluations "
              << fmt(s.mean_evaluations) << "\n";
}

int cmd_bench_compare(const DesignArgs& d, const SolverArgs& s, const Common& c, int count, uint64_t seed, int nx,
                      int nd, int ns, int k, int i_max, long long budget) {
    const Options opt = new_options();
    d.apply(opt.get(), ns);
    s.apply(opt.get());
    check(precis_options_set_jobs(opt.get(), c.jobs), "--jobs");
    check(precis_options_set_rlm(opt.get(), i_max, 0.0), "--i-max");
    if (budget < 0) {
        throw UsageError("--budget must be non-negative");
    }
    check(precis_options_set_budget(opt.get(), static_cast<uint64_t>(budget)), "--budget");
    const fs::path dir = prepare_out(c.out);
    const std::string path = (dir / "comparison.csv").string();
    const std::string timing = (dir / "comparison_timing.csv").string();
    precis_compare_summary sum{};
    check(precis_bench_compare(opt.get(), count, seed, nx, nd, ns, k, path.c_str(), timing.c_str(), &sum),
          "bench compare");
    std::cout << "systems " << sum.systems << "\n";
    print_summary("gse", sum.gse);
    print_summary("lpe", sum.lpe);
    print_summary("rlm", sum.rlm);
    std::cout << "wrote " << path << " and " << timing << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    // CLI11 silently skips environment values that fail validation
    if (const char* env = std::getenv("PRECIS_JOBS"); env != nullptr && *env != '\0') {
        int v = 0;
        const std::string_view text(env);
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v < 1) {
            std::cerr << "error: PRECIS_JOBS must be a positive integer, got '" << env << "'\n";
            return kExitInput;
        }
    }
    CLI::App app{"Sensor-precision-minimizing H2/Hinf observer and filter design"};
    auto config = std::make_shared<JsonConfig>();
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        const bool top = a == "design" || a == "select" || a == "verify" || a == "bench";
        const bool bench_sub = a == "example1" || a == "scaling" || a == "compare";
        if (config->command.empty() ? top : (config->command == std::vector<std::string>{"bench"} && bench_sub)) {
            config->command.push_back(a);
        }
    }
    app.config_formatter(config);
    app.set_config("--config", "", "JSON config file; command-line flags override its values");
    app.fallthrough();
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(precis_version()));

    // design
    auto* design = app.add_subcommand("design", "design an estimator for one sensor subset");
    PlantArgs design_plant;
    DesignArgs design_args;
    SolverArgs design_solver;
    Common design_common;
    std::string subset;
    design_plant.add(design);
    design_args.add(design, true);
    design->add_option("--subset", subset, "1-based sensor ids, e.g. 1,4 (default: all)");
    design_solver.add(design);
    design_common.add(design);

    // select
    auto* select = app.add_subcommand("select", "choose at most k sensors");
    PlantArgs select_plant;
    DesignArgs select_args;
    SolverArgs select_solver;
    Common select_common;
    std::string algorithm = "gse";
    int k = 0;
    int i_max = 50;
    double rlm_eps = 0.0;
    long long budget = 10000;
    select_plant.add(select);
    select_args.add(select, true);
    select->add_option("--algorithm", algorithm, "gse | lpe | rlm | exhaustive")->capture_default_str();
    select->add_option("-k,--k", k, "cardinality bound")->required();
    select->add_option("--i-max", i_max, "rlm iteration cap")->capture_default_str();
    select->add_option("--rlm-eps", rlm_eps, "rlm reweighting offset (<= 0: automatic)");
    select->add_option("--budget", budget, "exhaustive subset budget")->capture_default_str();
    select_solver.add(select);
    select_common.add(select);

    // verify
    auto* verify = app.add_subcommand("verify", "recompute the achieved norm of a result file");
    std::string result_file;
    std::optional<double> verify_gamma;
    verify->add_option("result", result_file, "result file written by design or select")->required();
    verify->add_option("--gamma", verify_gamma, "bound to check instead of the stored one");

    // bench
    auto* bench = app.add_subcommand("bench", "benchmarks");
    bench->require_subcommand(1);
    auto* ex1 = bench->add_subcommand("example1", "four-sensor example regression");
    SolverArgs ex1_solver;
    Common ex1_common;
    ex1_solver.add(ex1);
    ex1_common.add(ex1);

    auto* scaling = bench->add_subcommand("scaling", "solve time against spring-mass size");
    std::string masses = "2,4,8";
    double scaling_gamma = 0.5;
    int reps = 3;
    Common scaling_common;
    scaling->add_option("--masses", masses, "comma-separated mass counts")->capture_default_str();
    scaling->add_option("--gamma", scaling_gamma, "performance bound")->capture_default_str();
    scaling->add_option("--reps", reps, "repetitions per size (median reported)")->capture_default_str();
    scaling_common.add(scaling);

    auto* compare = bench->add_subcommand("compare", "GSE, LPE and RLM against exhaustive search");
    DesignArgs compare_args;
    compare_args.gamma = 0.1;
    SolverArgs compare_solver;
    Common compare_common;
    int count = 20;
    uint64_t seed = 0;
    int nx = 5, nd = 3, ns = 12, ck = 4, c_i_max = 50;
    long long c_budget = 10000;
    compare_args.add(compare, false);
    compare->add_option("--count", count, "number of random systems")->capture_default_str();
    compare->add_option("--seed", seed, "seed of the first system")->capture_default_str();
    compare->add_option("--nx", nx, "states")->capture_default_str();
    compare->add_option("--nd", nd, "disturbances")->capture_default_str();
    compare->add_option("--ns", ns, "candidate sensors")->capture_default_str();
    compare->add_option("-k,--k", ck, "cardinality bound")->capture_default_str();
    compare->add_option("--i-max", c_i_max, "rlm iteration cap")->capture_default_str();
    compare->add_option("--budget", c_budget, "exhaustive subset budget")->capture_default_str();
    compare_solver.add(compare);
    compare_common.add(compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (design->parsed()) {
            return cmd_design(design_plant, design_args, design_solver, design_common, subset);
        }
        if (select->parsed()) {
            return cmd_select(select_plant, select_args, select_solver, select_common, algorithm, k, i_max, rlm_eps,
                              budget);
        }
        if (verify->parsed()) {
            return cmd_verify(result_file, verify_gamma);
        }
        if (ex1->parsed()) {
            return cmd_bench_example1(ex1_solver, ex1_common);
        }
        if (scaling->parsed()) {
            return cmd_bench_scaling(masses, scaling_gamma, reps, scaling_common);
        }
        if (compare->parsed()) {
            return cmd_bench_compare(compare_args, compare_solver, compare_common, count, seed, nx, nd, ns, ck,
                                     c_i_max, c_budget);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ApiError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.status);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
