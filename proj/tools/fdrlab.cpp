// Command-line front end: apply step-up procedures to p-value files, compute
// asymptotic quantities, run simulation suites and emit figure data.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdrlab/distributions.hpp"
#include "fdrlab/gof.hpp"
#include "fdrlab/io.hpp"
#include "fdrlab/montecarlo.hpp"
#include "fdrlab/procedures.hpp"
#include "fdrlab/theory.hpp"
#include "fdrlab/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;

int cmd_reject(const std::string& input, const std::string& method, double q, double delta,
               double x, const std::string& out_path) {
    fdrlab::PValueBatch batch = fdrlab::read_pvalue_csv(input);
    fdrlab::RejectionOutcome outcome;
    if (method == "bh")
        outcome = fdrlab::bh_count(batch, q);
    else if (method == "bh-strict")
        outcome = fdrlab::bh_count_strict(batch, q);
    else if (method == "bhs")
        outcome = fdrlab::bhs(batch, delta, x);
    else
        throw std::invalid_argument("unknown method: " + method);
    if (batch.has_labels()) fdrlab::annotate(outcome, batch);
    if (out_path.empty()) {
        fdrlab::write_rejection_csv(std::cout, batch, outcome);
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
        fdrlab::write_rejection_csv(out, batch, outcome);
    }
    return kExitOk;
}

int cmd_theory(const std::string& model_spec, double gamma, std::optional<double> q,
               std::optional<double> delta, std::optional<double> x,
               const std::string& out_path) {
    fdrlab::AlternativeModel model = fdrlab::parse_model(model_spec);
    nlohmann::ordered_json j;
    j["model"] = fdrlab::format_model(model);
    j["gamma"] = gamma;
    if (q) {
        j["q"] = *q;
        j["asymptotics"] = fdrlab::summary_to_json(fdrlab::rho(model, *q, gamma));
    }
    if (delta && x) {
        j["delta"] = *delta;
        j["x"] = *x;
        j["bhs_bounds"] = fdrlab::bounds_to_json(fdrlab::bhs_bounds(model, gamma, *delta, *x));
    }
    std::string text = j.dump(2);
    if (out_path.empty()) {
        std::cout << text << '\n';
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
        out << text << '\n';
    }
    return kExitOk;
}

fdrlab::DependenceModel dependence_from_json(const nlohmann::json& j) {
    if (!j.contains("dependence")) return fdrlab::DependenceModel::independent();
    const auto& d = j.at("dependence");
    std::string kind = d.value("kind", "independent");
    if (kind == "independent") return fdrlab::DependenceModel::independent();
    if (kind == "equicorrelated")
        return fdrlab::DependenceModel::equicorrelated(d.at("rho_c").get<double>());
    if (kind == "ar1") return fdrlab::DependenceModel::ar1(d.at("phi").get<double>());
    throw std::invalid_argument("unknown dependence kind: " + kind);
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, int threads,
                 const std::string& out_path) {
    std::ifstream in(config_path);
    if (!in) throw std::invalid_argument("cannot open config file: " + config_path);
    nlohmann::json j = nlohmann::json::parse(in);
    fdrlab::SimConfig config;
    config.mixture.gamma = j.at("gamma").get<double>();
    config.mixture.alt = fdrlab::parse_model(j.at("model").get<std::string>());
    config.mixture.m = j.at("m").get<std::size_t>();
    config.mixture.null_dependence = dependence_from_json(j);
    std::string proc = j.value("procedure", "bh");
    if (proc == "bh")
        config.procedure = fdrlab::SimConfig::Procedure::BH;
    else if (proc == "bh-strict")
        config.procedure = fdrlab::SimConfig::Procedure::BHStrict;
    else if (proc == "bhs")
        config.procedure = fdrlab::SimConfig::Procedure::BHS;
    else
        throw std::invalid_argument("unknown procedure: " + proc);
    config.q = j.value("q", 0.1);
    config.delta = j.value("delta", 0.1);
    config.x = j.value("x", 0.5);
    config.reps = j.at("reps").get<std::size_t>();
    config.k_max = j.value("k_max", 2);
    config.seed = seed;
    config.threads = threads;
    fdrlab::SimReport report = fdrlab::run(config);
    std::string text = fdrlab::report_to_json(report).dump(2);
    if (out_path.empty()) {
        std::cout << text << '\n';
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
        out << text << '\n';
    }
    return kExitOk;
}

int cmd_verify(bool quick, std::uint64_t seed, int threads) {
    fdrlab::VerifyOptions opt;
    opt.quick = quick;
    opt.seed = seed;
    opt.threads = threads;
    auto results = fdrlab::verification_suite(opt);
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
        std::cout << '\n';
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitCheckFailure;
}

int cmd_figures(const std::string& which, const std::string& model_spec, double gamma,
                double delta, const std::string& out_dir) {
    fdrlab::AlternativeModel model = fdrlab::parse_model(model_spec);
    std::filesystem::create_directories(out_dir);
    fdrlab::GridSpec grid{0.0, 1.0, 100};
    auto write = [&](const std::string& name, const char* header,
                     const std::vector<fdrlab::FigureRow>& rows) {
        std::ofstream out(out_dir + "/" + name);
        if (!out) throw std::invalid_argument("cannot write to " + out_dir + "/" + name);
        fdrlab::write_figure_csv(out, header, rows);
    };
    if (which == "fig1")
        write("fig1.csv", "t,uniform,h", fdrlab::fig1_rows(model, gamma, grid));
    else if (which == "fig2")
        write("fig2.csv", "q,power,fdr", fdrlab::fig2_rows(model, gamma, grid));
    else if (which == "fig3")
        write("fig3.csv", "x,power_lo,power_hi",
              fdrlab::fig3_rows(model, gamma, delta, grid));
    else
        throw std::invalid_argument("unknown figure: " + which);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Step-up multiple-testing procedures, their asymptotics and a Monte Carlo "
                 "verification suite"};
    app.require_subcommand(1);

    // reject
    auto* reject = app.add_subcommand("reject", "Apply a procedure to a p-value CSV file");
    std::string input, method = "bh", out_path;
    double q = 0.1, delta = 0.1, x = 0.5;
    reject->add_option("--input", input, "Input CSV with column p and optional is_null")
        ->required();
    reject->add_option("--method", method, "bh | bh-strict | bhs")
        ->check(CLI::IsMember({"bh", "bh-strict", "bhs"}));
    reject->add_option("--q", q, "Step-up level for bh / bh-strict");
    reject->add_option("--delta", delta, "Target level for bhs");
    reject->add_option("--x", x, "Estimator cutoff for bhs");
    reject->add_option("--out", out_path, "Output CSV path (default: stdout)");

    // theory
    auto* theory = app.add_subcommand("theory", "Compute asymptotic quantities for a model");
    std::string model_spec;
    double gamma = 0.5;
    double t_q = -1.0, t_delta = -1.0, t_x = -1.0;
    std::string t_out;
    theory->add_option("--model", model_spec, "Family spec, e.g. power:alpha=0.1")->required();
    theory->add_option("--gamma", gamma, "Null fraction")->required();
    theory->add_option("--q", t_q, "Step-up level");
    theory->add_option("--delta", t_delta, "BHS target level");
    theory->add_option("--x", t_x, "BHS estimator cutoff");
    theory->add_option("--out", t_out, "Output JSON path (default: stdout)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run a replicated simulation from JSON");
    std::string config_path, sim_out;
    std::uint64_t seed = 42;
    int threads = 1;
    simulate->add_option("--config", config_path, "JSON configuration file")->required();
    simulate->add_option("--seed", seed, "Base seed (default 42)");
    simulate->add_option("--threads", threads, "Worker threads");
    simulate->add_option("--out", sim_out, "Output JSON path (default: stdout)");

    // verify
    auto* verify = app.add_subcommand("verify", "Run the full verification suite");
    bool quick = false;
    std::uint64_t v_seed = 42;
    int v_threads = 1;
    verify->add_flag("--quick", quick, "Reduced replicate counts");
    verify->add_option("--seed", v_seed, "Base seed (default 42)");
    verify->add_option("--threads", v_threads, "Worker threads");

    // figures
    auto* figures = app.add_subcommand("figures", "Emit figure data tables as CSV");
    std::string which, fig_model, fig_out = ".";
    double fig_gamma = 0.5, fig_delta = 0.1;
    figures->add_option("--which", which, "fig1 | fig2 | fig3")
        ->check(CLI::IsMember({"fig1", "fig2", "fig3"}))
        ->required();
    figures->add_option("--model", fig_model, "Family spec")->required();
    figures->add_option("--gamma", fig_gamma, "Null fraction")->required();
    figures->add_option("--delta", fig_delta, "BHS target level (fig3)");
    figures->add_option("--out", fig_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (reject->parsed()) return cmd_reject(input, method, q, delta, x, out_path);
        if (theory->parsed())
            return cmd_theory(model_spec, gamma,
                              t_q >= 0.0 ? std::optional<double>(t_q) : std::nullopt,
                              t_delta >= 0.0 ? std::optional<double>(t_delta) : std::nullopt,
                              t_x >= 0.0 ? std::optional<double>(t_x) : std::nullopt, t_out);
        if (simulate->parsed()) return cmd_simulate(config_path, seed, threads, sim_out);
        if (verify->parsed()) return cmd_verify(quick, v_seed, v_threads);
        if (figures->parsed()) return cmd_figures(which, fig_model, fig_gamma, fig_delta, fig_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return kExitConfigError;
}
