// =============================================================================
// strongsel — command-line front end.
//
// Subcommands: expand, oracle, simulate, asg, duality, wf-discrete,
// acceptance.  Every stochastic output is fully determined by --seed;
// floating-point values are rendered with 17 significant digits so that
// reruns are byte-identical.
// =============================================================================
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "strongsel/acceptance.hpp"
#include "strongsel/asg.hpp"
#include "strongsel/diffusion.hpp"
#include "strongsel/discrete_wf.hpp"
#include "strongsel/duality.hpp"
#include "strongsel/expansion.hpp"
#include "strongsel/model.hpp"
#include "strongsel/oracles.hpp"
#include "strongsel/rng.hpp"

using json = nlohmann::ordered_json;
namespace ss = strongsel;

namespace {

constexpr int kSpecVersion = 1;

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<int> parse_ints(const std::string& text) {
    std::string cleaned;
    for (char c : text) cleaned += (c == ',' ? ' ' : c);
    std::istringstream is(cleaned);
    std::vector<int> out;
    int v;
    while (is >> v) out.push_back(v);
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::string cleaned;
    for (char c : text) cleaned += (c == ',' ? ' ' : c);
    std::istringstream is(cleaned);
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    return out;
}

class Output {
  public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

void emit_json(Output& out, json j) {
    j["spec_version"] = kSpecVersion;
    out.stream() << j.dump(2) << "\n";
}

ss::LogQProvider make_provider(const ss::MutationModel& m, double sigma, int level_cap,
                               std::shared_ptr<ss::TruncatedSystemSolution>& keep_alive) {
    keep_alive = std::make_shared<ss::TruncatedSystemSolution>(m, sigma, level_cap);
    auto sol = keep_alive;
    return [sol](const std::vector<int>& n) { return sol->log_q(n); };
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"strong-selection asymptotics of the Wright-Fisher diffusion"};
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = ss::default_threads();
    app.add_option("--threads", threads, "worker threads for replicate-parallel commands");

    std::string model_path, out_path, n_text, nu_text, z_text, x_text, sigmas_text, times_text;
    std::uint64_t seed = 1;
    double sigma = 100.0, horizon = 1.0, dt = 0.0, t = 1.0;
    int hmax = 6, level_cap = 0, stride = 1;
    std::size_t replicates = 100000;

    // ---- expand ----
    auto* expand = app.add_subcommand("expand", "expansion coefficients qt_k(n) as CSV");
    expand->add_option("--model", model_path)->required();
    expand->add_option("--hmax", hmax, "table budget: k + ||n|| <= hmax");
    expand->add_option("--out", out_path, "CSV path ('-' = stdout)");

    // ---- oracle ----
    auto* oracle = app.add_subcommand("oracle", "finite-sigma sampling probability as JSON");
    std::string method = "pim-quad";
    ss::McOracleSettings mcs;
    oracle->add_option("--model", model_path)->required();
    oracle->add_option("--method", method)->check(CLI::IsMember({"pim-quad", "linsys", "mc"}));
    oracle->add_option("--sigma", sigma)->required();
    oracle->add_option("--n", n_text, "sample configuration, e.g. '1,2'")->required();
    oracle->add_option("--level-cap", level_cap, "linsys truncation level (default ||n||+6)");
    oracle->add_option("--paths", mcs.paths);
    oracle->add_option("--burn-in", mcs.burn_in);
    oracle->add_option("--run-length", mcs.run_length);
    oracle->add_option("--dt", mcs.dt);
    oracle->add_option("--seed", seed);
    oracle->add_option("--out", out_path);

    // ---- simulate ----
    auto* simulate = app.add_subcommand("simulate", "forward processes as CSV");
    simulate->require_subcommand(1);
    auto* sim_wf = simulate->add_subcommand("wf", "Wright-Fisher diffusion path");
    auto* sim_cbi = simulate->add_subcommand("cbi", "CBI fluctuation process");
    auto* sim_log = simulate->add_subcommand("logistic", "deterministic logistic trajectory");
    auto* sim_gm = simulate->add_subcommand("gaussian-moments", "fluctuation moment ODEs");
    for (auto* sc : {sim_wf, sim_cbi, sim_log, sim_gm}) {
        sc->add_option("--model", model_path)->required();
        sc->add_option("--seed", seed);
        sc->add_option("--out", out_path);
        sc->add_option("--horizon", horizon);
        sc->add_option("--dt", dt);
        sc->add_option("--stride", stride);
    }
    sim_wf->add_option("--x0", x_text, "initial frequencies (default uniform)");
    sim_cbi->add_option("--z0", z_text, "initial unfit fluctuations (default 0)");
    sim_cbi->add_option("--times", times_text, "explicit sampling times");
    sim_log->add_option("--xi0", x_text, "initial point (default uniform)");
    sim_gm->add_option("--xi0", x_text, "initial point (default uniform)");
    std::string mean_text;
    sim_gm->add_option("--mean0", mean_text, "initial fluctuation mean (default 0)");

    // ---- asg ----
    auto* asg = app.add_subcommand("asg", "ancestral process tooling");
    asg->require_subcommand(1);
    auto* asg_rates_cmd = asg->add_subcommand("rates", "exact reduced-graph rates as JSON");
    asg_rates_cmd->add_option("--model", model_path)->required();
    asg_rates_cmd->add_option("--sigma", sigma)->required();
    asg_rates_cmd->add_option("--n", n_text)->required();
    asg_rates_cmd->add_option("--nu", nu_text);
    asg_rates_cmd->add_option("--level-cap", level_cap);
    asg_rates_cmd->add_option("--out", out_path);
    auto* asg_fast = asg->add_subcommand("simulate-fast", "fast limiting process event log");
    asg_fast->add_option("--model", model_path)->required();
    asg_fast->add_option("--n", n_text)->required();
    asg_fast->add_option("--seed", seed);
    asg_fast->add_option("--out", out_path);
    auto* asg_slow = asg->add_subcommand("simulate-slow", "slow Kingman death chain event log");
    int n1 = 2;
    double theta_out = 0.0;
    asg_slow->add_option("--n1", n1)->required();
    asg_slow->add_option("--theta-out", theta_out);
    asg_slow->add_option("--seed", seed);
    asg_slow->add_option("--out", out_path);
    auto* asg_probe = asg->add_subcommand("probe", "sigma-scaling probe of q(n)");
    asg_probe->add_option("--model", model_path)->required();
    asg_probe->add_option("--n", n_text)->required();
    asg_probe->add_option("--sigmas", sigmas_text, "e.g. '100,200,400,800'")->required();
    asg_probe->add_option("--level-cap", level_cap);
    asg_probe->add_option("--out", out_path);

    // ---- duality ----
    auto* duality = app.add_subcommand("duality", "duality checks as JSON");
    duality->require_subcommand(1);
    auto* dual_gen = duality->add_subcommand("generator-check", "generator identity residuals");
    std::size_t grid_points = 200;
    dual_gen->add_option("--model", model_path)->required();
    dual_gen->add_option("--points", grid_points);
    dual_gen->add_option("--seed", seed);
    dual_gen->add_option("--out", out_path);
    auto* dual_mc = duality->add_subcommand("mc", "two-sided Monte Carlo duality estimate");
    dual_mc->add_option("--model", model_path)->required();
    dual_mc->add_option("--z0", z_text, "unfit fluctuation start")->required();
    dual_mc->add_option("--n0", n_text)->required();
    dual_mc->add_option("--t", t);
    dual_mc->add_option("--replicates", replicates);
    dual_mc->add_option("--seed", seed);
    dual_mc->add_option("--out", out_path);
    auto* dual_comp = duality->add_subcommand("component", "component-wise duality estimate");
    int comp_i = 2, comp_ni = 1;
    double comp_zi = 1.0;
    dual_comp->add_option("--model", model_path)->required();
    dual_comp->add_option("--i", comp_i, "allele index (2..d)");
    dual_comp->add_option("--zi", comp_zi);
    dual_comp->add_option("--ni", comp_ni);
    dual_comp->add_option("--t", t);
    dual_comp->add_option("--replicates", replicates);
    dual_comp->add_option("--seed", seed);
    dual_comp->add_option("--out", out_path);

    // ---- wf-discrete ----
    auto* wfd = app.add_subcommand("wf-discrete", "finite-population model tooling");
    wfd->require_subcommand(1);
    long popsize = 1000;
    double eps = 0.0, eps1 = 0.0, beta = 0.5, alpha = 0.0;
    std::string nlist_text = "1000,10000,100000";
    auto* wfd_step = wfd->add_subcommand("step", "simulate generations as CSV");
    long generations = 10;
    wfd_step->add_option("--model", model_path)->required();
    wfd_step->add_option("--N", popsize);
    wfd_step->add_option("--eps", eps, "mutation scaling (default 1/N)");
    wfd_step->add_option("--eps1", eps1, "selection scaling of allele 1 (default 1/N)");
    wfd_step->add_option("--x0", x_text);
    wfd_step->add_option("--generations", generations);
    wfd_step->add_option("--seed", seed);
    wfd_step->add_option("--out", out_path);
    auto* wfd_mom = wfd->add_subcommand("moments", "analytic increment moments as CSV");
    wfd_mom->add_option("--model", model_path)->required();
    wfd_mom->add_option("--N", popsize);
    wfd_mom->add_option("--eps", eps);
    wfd_mom->add_option("--eps1", eps1);
    wfd_mom->add_option("--alpha", alpha, "time scaling (default N)");
    wfd_mom->add_option("--x", x_text)->required();
    wfd_mom->add_option("--out", out_path);
    auto* wfd_scal = wfd->add_subcommand("scaling", "boundary fluctuation experiment as CSV");
    wfd_scal->add_option("--model", model_path)->required();
    wfd_scal->add_option("--z0", z_text, "unfit fluctuation start")->required();
    wfd_scal->add_option("--beta", beta);
    wfd_scal->add_option("--t", t);
    wfd_scal->add_option("--N-list", nlist_text);
    wfd_scal->add_option("--replicates", replicates);
    wfd_scal->add_option("--seed", seed);
    wfd_scal->add_option("--out", out_path);

    // ---- acceptance ----
    auto* acc = app.add_subcommand("acceptance", "run the acceptance suite");
    std::string suite = "primary";
    acc->add_option("--suite", suite)->check(CLI::IsMember({"primary"}));
    acc->add_option("--out", out_path, "machine-readable JSON report path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*expand) {
            ss::ModelFile mf = ss::load_model(model_path);
            mf.selection().require_rest_zero("expand");
            ss::ExpansionTable table = mf.pim()
                                           ? ss::expansion_pim(mf.pim_model(), hmax)
                                           : ss::expansion_general(mf.mutation_model(), hmax);
            Output out(out_path);
            out.stream() << "k";
            for (int i = 1; i <= mf.d; ++i) out.stream() << ",n" << i;
            out.stream() << ",qtilde\n";
            table.for_each([&](int k, const std::vector<int>& n, double v) {
                out.stream() << k;
                for (int c : n) out.stream() << "," << c;
                out.stream() << "," << g17(v) << "\n";
            });
        } else if (*oracle) {
            ss::ModelFile mf = ss::load_model(model_path);
            ss::SampleConfig n(parse_ints(n_text));
            ss::OracleResult res;
            json settings{{"sigma", sigma}, {"n", n.n}};
            if (method == "pim-quad") {
                // the quadrature handles general selection: sigma_2..sigma_d
                // come from the model file, sigma_1 from the flag
                std::vector<double> sigmas(mf.d, 0.0);
                sigmas[0] = sigma;
                for (int i = 1; i < mf.d && !mf.sigma_rest.empty(); ++i)
                    sigmas[i] = mf.sigma_rest[i - 1];
                res = ss::pim_quadrature_oracle(n, mf.pim_model(), sigmas);
            } else if (method == "linsys") {
                mf.selection().require_rest_zero("oracle --method linsys");
                int cap = level_cap > 0 ? level_cap : n.size() + 6;
                auto all = ss::truncated_system_oracle(mf.mutation_model(), sigma, cap);
                res = all.at(n.n);
                settings["level_cap"] = cap;
            } else {
                mf.selection().require_rest_zero("oracle --method mc");
                mcs.seed = seed;
                mcs.threads = threads;
                res = ss::mc_oracle(mf.mutation_model(), sigma, n, mcs);
                settings["paths"] = mcs.paths;
                settings["seed"] = seed;
            }
            Output out(out_path);
            emit_json(out, json{{"value", res.value},
                                {"error_estimate", res.error_estimate},
                                {"method", res.method},
                                {"settings", settings}});
        } else if (*sim_wf) {
            ss::ModelFile mf = ss::load_model(model_path);
            ss::MutationModel m = mf.mutation_model();
            std::vector<double> x0 = x_text.empty()
                                         ? std::vector<double>(mf.d, 1.0 / mf.d)
                                         : parse_doubles(x_text);
            double use_dt = dt > 0.0 ? dt : 0.05 / std::max(1.0, mf.sigma);
            ss::DiffusionPath path = ss::wf_simulate(m, mf.selection(), ss::SimplexPoint(x0),
                                                     horizon, use_dt, seed, stride);
            Output out(out_path);
            out.stream() << "t";
            for (int i = 1; i <= mf.d; ++i) out.stream() << ",x" << i;
            out.stream() << "\n";
            for (std::size_t k = 0; k < path.times.size(); ++k) {
                out.stream() << g17(path.times[k]);
                for (double v : path.states[k].x) out.stream() << "," << g17(v);
                out.stream() << "\n";
            }
        } else if (*sim_cbi) {
            ss::ModelFile mf = ss::load_model(model_path);
            ss::MutationModel m = mf.mutation_model();
            std::vector<double> z0 = z_text.empty() ? std::vector<double>(mf.d - 1, 0.0)
                                                    : parse_doubles(z_text);
            std::vector<double> times = times_text.empty() ? std::vector<double>{}
                                                           : parse_doubles(times_text);
            if (times.empty()) {
                double use_dt = dt > 0.0 ? dt : horizon / 100.0;
                for (double tt = use_dt; tt <= horizon + 1e-12; tt += use_dt)
                    times.push_back(tt);
            }
            auto states = ss::cbi_simulate(m, ss::CbiState::from_unfit(z0), times, seed);
            Output out(out_path);
            out.stream() << "t";
            for (int i = 1; i <= mf.d; ++i) out.stream() << ",z" << i;
            out.stream() << "\n";
            for (const auto& st : states) {
                out.stream() << g17(st.time);
                for (double v : st.z) out.stream() << "," << g17(v);
                out.stream() << "\n";
            }
        } else if (*sim_log) {
            ss::ModelFile mf = ss::load_model(model_path);
            std::vector<double> xi0 = x_text.empty() ? std::vector<double>(mf.d, 1.0 / mf.d)
                                                     : parse_doubles(x_text);
            double use_dt = dt > 0.0 ? dt : horizon / 100.0;
            Output out(out_path);
            out.stream() << "t";
            for (int i = 1; i <= mf.d; ++i) out.stream() << ",xi" << i;
            out.stream() << "\n";
            for (double tt = 0.0; tt <= horizon + 1e-12; tt += use_dt) {
                ss::SimplexPoint p = ss::logistic_trajectory(ss::SimplexPoint(xi0), tt);
                out.stream() << g17(tt);
                for (double v : p.x) out.stream() << "," << g17(v);
                out.stream() << "\n";
            }
        } else if (*sim_gm) {
            ss::ModelFile mf = ss::load_model(model_path);
            const int d = mf.d;
            std::vector<double> xi0 = x_text.empty() ? std::vector<double>(d, 1.0 / d)
                                                     : parse_doubles(x_text);
            Eigen::VectorXd m0 = Eigen::VectorXd::Zero(d);
            if (!mean_text.empty()) {
                auto mv = parse_doubles(mean_text);
                if (static_cast<int>(mv.size()) != d)
                    throw std::invalid_argument("--mean0 must have d entries");
                m0 = Eigen::VectorXd::Map(mv.data(), d);
            }
            double use_dt = dt > 0.0 ? dt : std::min(0.01, horizon / 100.0);
            auto moments = ss::gaussian_moments_solve(ss::SimplexPoint(xi0), m0,
                                                      Eigen::MatrixXd::Zero(d, d), horizon,
                                                      use_dt, stride);
            Output out(out_path);
            out.stream() << "t";
            for (int i = 1; i <= d; ++i) out.stream() << ",m" << i;
            for (int i = 1; i <= d; ++i)
                for (int j = 1; j <= d; ++j) out.stream() << ",C" << i << j;
            out.stream() << "\n";
            for (const auto& gm : moments) {
                out.stream() << g17(gm.t);
                for (int i = 0; i < d; ++i) out.stream() << "," << g17(gm.mean[i]);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) out.stream() << "," << g17(gm.cov(i, j));
                out.stream() << "\n";
            }
        } else if (*asg_rates_cmd) {
            ss::ModelFile mf = ss::load_model(model_path);
            mf.selection().require_rest_zero("asg rates");
            ss::MutationModel m = mf.mutation_model();
            std::vector<int> n = parse_ints(n_text);
            std::vector<int> nu = nu_text.empty() ? std::vector<int>(mf.d, 0)
                                                  : parse_ints(nu_text);
            ss::AsgState state(n, nu);
            int cap = level_cap > 0 ? level_cap : state.total() + 7;
            std::shared_ptr<ss::TruncatedSystemSolution> keep;
            ss::RateTable table = ss::asg_rates(state, m, sigma, make_provider(m, sigma, cap, keep));
            json entries = json::array();
            for (const auto& e : table.entries) {
                json je{{"kind", ss::to_string(e.kind)},
                        {"type", e.type + 1},
                        {"rate", e.rate},
                        {"target_n", e.target.n},
                        {"target_nu", e.target.nu}};
                if (e.type_to >= 0) je["type_to"] = e.type_to + 1;
                entries.push_back(je);
            }
            Output out(out_path);
            emit_json(out, json{{"entries", entries},
                                {"total", table.total},
                                {"total_closed_form", table.total_closed_form},
                                {"settings", {{"sigma", sigma}, {"level_cap", cap}}}});
        } else if (*asg_fast) {
            ss::ModelFile mf = ss::load_model(model_path);
            mf.selection().require_rest_zero("asg simulate-fast");
            auto events = ss::simulate_fast(ss::SampleConfig(parse_ints(n_text)),
                                            mf.mutation_model(), seed);
            Output out(out_path);
            for (const auto& e : events) {
                json je{{"time", e.time},
                        {"kind", ss::to_string(e.kind)},
                        {"type", e.type + 1},
                        {"n", e.state_after.n},
                        {"nu", e.state_after.nu}};
                out.stream() << je.dump() << "\n";
            }
        } else if (*asg_slow) {
            auto events = ss::simulate_slow(n1, theta_out, seed);
            Output out(out_path);
            for (const auto& e : events) {
                json je{{"time", e.time},
                        {"kind", ss::to_string(e.kind)},
                        {"n1", e.state_after.n[0]},
                        {"theta_out", theta_out}};
                out.stream() << je.dump() << "\n";
            }
        } else if (*asg_probe) {
            ss::ModelFile mf = ss::load_model(model_path);
            mf.selection().require_rest_zero("asg probe");
            auto rep = ss::genealogical_interpretation_probe(
                ss::SampleConfig(parse_ints(n_text)), mf.mutation_model(),
                parse_doubles(sigmas_text), level_cap);
            Output out(out_path);
            emit_json(out, json{{"sigmas", rep.sigmas},
                                {"values", rep.values},
                                {"fitted_slope", rep.fitted_slope},
                                {"fitted_constant", rep.fitted_constant},
                                {"expected_slope", rep.expected_slope},
                                {"qt0", rep.q0_value}});
        } else if (*dual_gen) {
            ss::ModelFile mf = ss::load_model(model_path);
            ss::MutationModel m = mf.mutation_model();
            auto rng = ss::make_stream(seed, 0);
            std::uniform_real_distribution<double> zdist(0.2, 3.0);
            std::uniform_int_distribution<int> ndist(0, 3);
            std::vector<ss::DualityPoint> grid;
            while (grid.size() < grid_points) {
                std::vector<double> z(mf.d - 1);
                std::vector<int> n(mf.d, 0);
                for (auto& v : z) v = zdist(rng);
                n[0] = ndist(rng);
                int unfit = 0;
                for (int i = 1; i < mf.d; ++i) {
                    n[i] = ndist(rng);
                    unfit += n[i];
                }
                if (unfit == 0) n[1] = 1;
                grid.push_back({ss::CbiState::from_unfit(z), ss::SampleConfig(n)});
            }
            auto res = ss::generator_duality_check(grid, m);
            Output out(out_path);
            emit_json(out, json{{"max_residual_analytic", res.max_residual_analytic},
                                {"max_residual_fd", res.max_residual_fd},
                                {"max_residual_closed_form", res.max_residual_closed},
                                {"settings", {{"points", grid_points}, {"seed", seed}}}});
        } else if (*dual_mc) {
            ss::ModelFile mf = ss::load_model(model_path);
            mf.selection().require_rest_zero("duality mc");
            auto est = ss::mc_duality_experiment(ss::CbiState::from_unfit(parse_doubles(z_text)),
                                                 ss::SampleConfig(parse_ints(n_text)), t,
                                                 replicates, seed, mf.mutation_model(), threads);
            Output out(out_path);
            emit_json(out, json{{"lhs", est.lhs},
                                {"lhs_se", est.lhs_se},
                                {"rhs", est.rhs},
                                {"rhs_se", est.rhs_se},
                                {"ci99_overlap", est.ci_overlap()},
                                {"settings",
                                 {{"t", t}, {"replicates", replicates}, {"seed", seed}}}});
        } else if (*dual_comp) {
            ss::ModelFile mf = ss::load_model(model_path);
            mf.selection().require_rest_zero("duality component");
            auto est = ss::componentwise_duality_check(comp_i - 1, comp_zi, comp_ni, t,
                                                       replicates, seed, mf.mutation_model(),
                                                       threads);
            Output out(out_path);
            emit_json(out, json{{"lhs", est.lhs},
                                {"lhs_se", est.lhs_se},
                                {"rhs", est.rhs},
                                {"rhs_se", est.rhs_se},
                                {"ci99_overlap", est.ci_overlap()},
                                {"settings",
                                 {{"i", comp_i}, {"zi", comp_zi}, {"ni", comp_ni}, {"t", t}}}});
        } else if (*wfd_step) {
            ss::ModelFile mf = ss::load_model(model_path);
            ss::MutationModel m = mf.mutation_model();
            double use_eps = eps > 0.0 ? eps : 1.0 / popsize;
            double use_eps1 = eps1 > 0.0 ? eps1 : 1.0 / popsize;
            std::vector<double> sigmas(mf.d, 0.0);
            sigmas[0] = mf.sigma;
            for (int i = 1; i < mf.d && !mf.sigma_rest.empty(); ++i)
                sigmas[i] = mf.sigma_rest[i - 1];
            std::vector<double> eps_i(mf.d, use_eps);
            eps_i[0] = use_eps1;
            auto p = ss::DiscreteWfParams::from_scalings(m, sigmas, popsize, use_eps, eps_i);
            std::vector<double> x = x_text.empty() ? std::vector<double>(mf.d, 1.0 / mf.d)
                                                   : parse_doubles(x_text);
            Output out(out_path);
            out.stream() << "generation";
            for (int i = 1; i <= mf.d; ++i) out.stream() << ",x" << i;
            out.stream() << "\n";
            auto rng = ss::make_stream(seed, 0);
            std::vector<long> counts(mf.d);
            for (int i = 0; i < mf.d; ++i) counts[i] = std::lround(x[i] * popsize);
            for (long g = 0; g <= generations; ++g) {
                out.stream() << g;
                for (long c : counts) out.stream() << "," << g17(double(c) / popsize);
                out.stream() << "\n";
                counts = ss::wf_step_counts(counts, p, rng);
            }
        } else if (*wfd_mom) {
            ss::ModelFile mf = ss::load_model(model_path);
            ss::MutationModel m = mf.mutation_model();
            double use_eps = eps > 0.0 ? eps : 1.0 / popsize;
            double use_eps1 = eps1 > 0.0 ? eps1 : 1.0 / popsize;
            double use_alpha = alpha > 0.0 ? alpha : double(popsize);
            std::vector<double> sigmas(mf.d, 0.0);
            sigmas[0] = mf.sigma;
            for (int i = 1; i < mf.d && !mf.sigma_rest.empty(); ++i)
                sigmas[i] = mf.sigma_rest[i - 1];
            std::vector<double> eps_i(mf.d, use_eps);
            eps_i[0] = use_eps1;
            auto p = ss::DiscreteWfParams::from_scalings(m, sigmas, popsize, use_eps, eps_i);
            auto mom = ss::increment_moments(parse_doubles(x_text), p, use_alpha);
            Output out(out_path);
            out.stream() << "quantity,i,j,value\n";
            for (int i = 0; i < mf.d; ++i)
                out.stream() << "drift," << i + 1 << ",," << g17(mom.drift[i]) << "\n";
            for (int i = 0; i < mf.d; ++i)
                for (int j = 0; j < mf.d; ++j)
                    out.stream() << "cov," << i + 1 << "," << j + 1 << ","
                                 << g17(mom.cov(i, j)) << "\n";
        } else if (*wfd_scal) {
            ss::ModelFile mf = ss::load_model(model_path);
            std::vector<long> Ns;
            for (double v : parse_doubles(nlist_text)) Ns.push_back(std::lround(v));
            auto rows = ss::boundary_fluctuation_experiment(mf.mutation_model(),
                                                            parse_doubles(z_text), beta, t, Ns,
                                                            replicates, seed, threads);
            Output out(out_path);
            out.stream() << "N,component,realized_z0,wf_mean,wf_mean_se,wf_second,"
                            "wf_second_se,cir_mean,cir_second\n";
            for (const auto& r : rows) {
                out.stream() << r.N << "," << r.component + 1 << "," << g17(r.realized_z0)
                             << "," << g17(r.wf_mean) << "," << g17(r.wf_mean_se) << ","
                             << g17(r.wf_second) << "," << g17(r.wf_second_se) << ","
                             << g17(r.limit_mean) << "," << g17(r.limit_second) << "\n";
            }
        } else if (*acc) {
            ss::AcceptanceSuite suite_runner(threads);
            auto results = suite_runner.run_all();
            bool ok = ss::AcceptanceSuite::print_and_summarize(results);
            if (!out_path.empty()) {
                json jr = json::array();
                for (const auto& r : results)
                    jr.push_back(json{{"id", r.id},
                                      {"name", r.name},
                                      {"passed", r.passed},
                                      {"details", r.details},
                                      {"seconds", r.seconds}});
                Output out(out_path);
                emit_json(out, json{{"criteria", jr}, {"all_passed", ok}});
            }
            return ok ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
