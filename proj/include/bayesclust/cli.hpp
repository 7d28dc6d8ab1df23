#pragma once

// Batch command-line front end. Every command validates its inputs, runs,
// then commits all output files at once and emits a JSON run report:
//   {command, inputs:[{path, fnv1a64}], seed, timing_ms, result}
// Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 parse error,
// 4 refused computation.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "epl.hpp"
#include "errors.hpp"
#include "gibbs.hpp"
#include "io.hpp"
#include "multimodal.hpp"
#include "psm.hpp"
#include "report.hpp"
#include "uncertainty.hpp"

namespace bayesclust::cli {

enum ExitCode : int { exit_ok = 0, exit_io = 1, exit_usage = 2, exit_parse = 3, exit_refused = 4 };

class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using json = report::json;

/// Default worker count for greedy restarts, from BCLUST_THREADS.
inline unsigned default_threads() {
    if (const char* env = std::getenv("BCLUST_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return 1;
}

struct GreedyOptions {
    int restarts = 10;
    int max_clusters = 0;
    int max_sweeps = 1000;
    std::uint64_t seed = 1;
    std::string init = "mixed";
    int random_k = 0;
    unsigned threads = default_threads();

    void attach(CLI::App* cmd) {
        cmd->add_option("--restarts", restarts, "Greedy restarts")->capture_default_str();
        cmd->add_option("--max-clusters", max_clusters, "Cluster cap (0 = N)")->capture_default_str();
        cmd->add_option("--max-sweeps", max_sweeps, "Sweep limit per restart")->capture_default_str();
        cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
        cmd->add_option("--init", init, "mixed | one | singletons | random")->capture_default_str();
        cmd->add_option("--random-k", random_k, "K for random initializations (0 = ceil(sqrt N))");
        cmd->add_option("--threads", threads, "Worker threads for restarts (default $BCLUST_THREADS or 1)");
    }

    GreedyConfig config() const {
        if (restarts < 1) throw usage_error("--restarts must be at least 1");
        if (max_clusters < 0) throw usage_error("--max-clusters must be at least 1");
        if (max_sweeps < 1) throw usage_error("--max-sweeps must be at least 1");
        GreedyConfig cfg;
        cfg.restarts = restarts;
        cfg.max_clusters = max_clusters;
        cfg.max_sweeps = max_sweeps;
        cfg.seed = seed;
        cfg.random_k = random_k;
        cfg.threads = threads;
        if (init == "mixed") cfg.init = InitKind::Mixed;
        else if (init == "one") cfg.init = InitKind::OneCluster;
        else if (init == "singletons") cfg.init = InitKind::Singletons;
        else if (init == "random") cfg.init = InitKind::Random;
        else throw usage_error("unknown --init '" + init + "'");
        return cfg;
    }
};

inline LossKind loss_option(const std::string& name) {
    if (auto k = parse_loss_kind(name)) return *k;
    throw usage_error("unknown loss '" + name + "' (expected binder, vi, nvi or nid)");
}

/// Accumulates inputs, pending output files and the result payload of one command.
class Run {
public:
    std::string read_input(const std::string& path) {
        std::string content;
        try {
            content = io::read_file(path);
        } catch (const std::runtime_error& e) {
            throw parse_error(e.what());
        }
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(io::fnv1a(content)));
        inputs_.push_back({{"path", path}, {"fnv1a64", hex}});
        return content;
    }

    PartitionSample read_sample(const std::string& path) { return io::parse_label_matrix(read_input(path)); }

    void write(std::string path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

    void commit() const {
        for (const auto& [path, content] : files_) io::write_file_atomic(path, content);
    }

    json& result() { return result_; }
    std::optional<std::uint64_t> seed;

    json report(const std::string& command, double ms) const {
        json r{{"command", command}, {"inputs", inputs_}};
        r["seed"] = seed ? json(*seed) : json(nullptr);
        r["timing_ms"] = ms;
        r["result"] = result_;
        return r;
    }

private:
    json inputs_ = json::array();
    std::vector<std::pair<std::string, std::string>> files_;
    json result_ = json::object();
};

inline Partition resolve_center(Run& run, const std::string& spec, const PartitionSample& sample, LossKind kind,
                                const GreedyConfig& cfg) {
    if (spec == "auto") {
        const auto opt = greedy_minimize(sample, kind, cfg);
        run.result()["center_source"] = "auto";
        run.result()["center_epl"] = opt.epl;
        run.seed = cfg.seed;
        return opt.partition;
    }
    const auto rows = run.read_sample(spec);
    if (rows.size() != 1) throw usage_error("center file must hold exactly one partition");
    if (rows.items() != sample.items()) throw usage_error("center length does not match the sample");
    run.result()["center_source"] = spec;
    return rows[0];
}

inline std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    for (auto tok : io::detail::tokens(text)) {
        double v = 0;
        if (!io::detail::parse_real(tok, v)) throw usage_error(std::string("invalid number in ") + what);
        out.push_back(v);
    }
    if (out.empty()) throw usage_error(std::string("empty ") + what);
    return out;
}

/// Runs one command line (without the program name) and returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Summaries of posterior samples of clusterings"};
    app.name("bclust");
    app.require_subcommand(1);

    std::string report_path;
    std::string input;
    std::string loss_name = "vi";
    GreedyOptions greedy;

    // summarise
    auto* summarise = app.add_subcommand("summarise", "Bayes partition minimizing the expected posterior loss");
    bool exhaustive = false;
    std::size_t limit = 10;
    std::string partition_out;
    summarise->add_option("draws", input, "Label matrix, one draw per row")->required();
    summarise->add_option("--loss", loss_name, "binder | vi | nvi | nid")->capture_default_str();
    summarise->add_flag("--exhaustive", exhaustive, "Enumerate all partitions instead of greedy search");
    summarise->add_option("--limit", limit, "Largest N accepted by --exhaustive")->capture_default_str();
    summarise->add_option("--partition-out", partition_out, "Write the optimal partition as a one-row label file");
    summarise->add_option("-o,--output", report_path, "Report path (default stdout)");
    greedy.attach(summarise);

    // ball
    auto* ball = app.add_subcommand("ball", "Credible ball around the Bayes partition");
    std::string center_spec = "auto";
    double alpha = 0.05;
    std::string distances_out;
    ball->add_option("draws", input, "Label matrix")->required();
    ball->add_option("--center", center_spec, "auto, or a one-row label file")->capture_default_str();
    ball->add_option("--loss", loss_name, "Distance / estimation loss")->capture_default_str();
    ball->add_option("--alpha", alpha, "Ball holds at least 1 - alpha of the posterior mass")->capture_default_str();
    ball->add_option("--distances", distances_out, "CSV of draw_index,distance");
    ball->add_option("-o,--output", report_path, "Report path (default stdout)");
    greedy.attach(ball);

    // hpd
    auto* hpd = app.add_subcommand("hpd", "High posterior density region over sampled partitions");
    double gamma = 0.0;
    double mass = 0.0;
    hpd->add_option("draws", input, "Label matrix")->required();
    hpd->add_option("--center", center_spec, "auto, or a one-row label file")->capture_default_str();
    hpd->add_option("--loss", loss_name, "Distance / estimation loss")->capture_default_str();
    auto* gamma_opt = hpd->add_option("--gamma", gamma, "Keep partitions with probability >= gamma");
    auto* mass_opt = hpd->add_option("--mass", mass, "Smallest set reaching this total mass");
    gamma_opt->excludes(mass_opt);
    hpd->add_option("-o,--output", report_path, "Report path (default stdout)");
    greedy.attach(hpd);

    // psm
    auto* psm_cmd = app.add_subcommand("psm", "Posterior similarity matrix");
    std::string psm_out;
    bool vi_lb = false;
    psm_cmd->add_option("draws", input, "Label matrix")->required();
    psm_cmd->add_option("-o,--output", psm_out, "PSM CSV path")->required();
    psm_cmd->add_flag("--vi-lb-optimize", vi_lb, "Also minimize the VI lower bound");
    psm_cmd->add_option("--report", report_path, "Report path (default stdout)");
    greedy.attach(psm_cmd);

    // compare-losses
    auto* compare = app.add_subcommand("compare-losses", "Bayes partition under every loss");
    compare->add_option("draws", input, "Label matrix")->required();
    compare->add_option("-o,--output", report_path, "Report path (default stdout)");
    greedy.attach(compare);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Synthetic data and posterior samples");
    simulate->require_subcommand(1);
    std::string out_path;
    std::uint64_t sim_seed = 1;
    std::size_t n_points = 200;

    auto* sq = simulate->add_subcommand("uniform-square", "Points uniform on [-1,1]^2");
    sq->add_option("-n", n_points, "Number of points")->capture_default_str();
    sq->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
    sq->add_option("-o,--output", out_path, "Dataset CSV")->required();
    sq->add_option("--report", report_path, "Report path (default stdout)");

    auto* gmm = simulate->add_subcommand("gmm", "Isotropic Gaussian mixture data");
    std::string centers_text = "-5,0 0,0 5,0";
    std::string sds_text = "0.5";
    std::string weights_text;
    std::string labels_out;
    gmm->add_option("-n", n_points, "Number of points")->capture_default_str();
    gmm->add_option("--centers", centers_text, "Centers as 'x,y x,y ...' (components separated by spaces)")
        ->capture_default_str();
    gmm->add_option("--sd", sds_text, "One sd, or one per component")->capture_default_str();
    gmm->add_option("--weights", weights_text, "Component weights (default uniform)");
    gmm->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
    gmm->add_option("-o,--output", out_path, "Dataset CSV")->required();
    gmm->add_option("--labels-out", labels_out, "True labels as a one-row label file");
    gmm->add_option("--report", report_path, "Report path (default stdout)");

    auto* mm = simulate->add_subcommand("multimodal", "Perturbed draws around anchor partitions");
    std::string anchors_path;
    int flips = 0;
    double noise_fraction = 1.0;
    std::size_t draws = 1000;
    mm->add_option("--anchors", anchors_path, "Label file, one anchor per row")->required();
    mm->add_option("--weights", weights_text, "Anchor weights (default uniform)");
    mm->add_option("--flips", flips, "Single-item reassignments per perturbed draw")->capture_default_str();
    mm->add_option("--noise-fraction", noise_fraction, "Fraction of draws perturbed")->capture_default_str();
    mm->add_option("--draws", draws, "Number of draws")->capture_default_str();
    mm->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
    mm->add_option("-o,--output", out_path, "Label matrix CSV")->required();
    mm->add_option("--report", report_path, "Report path (default stdout)");

    auto* gibbs = simulate->add_subcommand("gibbs", "Collapsed Gibbs sampler for a Gaussian mixture");
    GibbsConfig gcfg;
    std::string data_path;
    std::string data_out;
    double mu0 = 0.0;
    gibbs->add_option("--data", data_path, "Dataset CSV (default: uniform-square data of size -n)");
    gibbs->add_option("-n", n_points, "Points when generating uniform-square data")->capture_default_str();
    gibbs->add_option("--data-out", data_out, "Write the dataset used");
    gibbs->add_option("--components", gcfg.components, "Mixture components K")->capture_default_str();
    gibbs->add_option("--alpha0", gcfg.dirichlet_alpha, "Dirichlet concentration")->capture_default_str();
    gibbs->add_option("--mu0", mu0, "Prior mean (all dimensions)")->capture_default_str();
    gibbs->add_option("--kappa0", gcfg.prior_scale, "Prior mean precision scale")->capture_default_str();
    gibbs->add_option("--a0", gcfg.prior_shape, "Inverse-gamma shape")->capture_default_str();
    gibbs->add_option("--b0", gcfg.prior_rate, "Inverse-gamma rate")->capture_default_str();
    gibbs->add_option("--iters", gcfg.iters, "Sweeps")->capture_default_str();
    gibbs->add_option("--burnin", gcfg.burnin, "Burn-in sweeps")->capture_default_str();
    gibbs->add_option("--thin", gcfg.thin, "Thinning interval")->capture_default_str();
    gibbs->add_option("--seed", sim_seed, "RNG seed (data and chain)")->capture_default_str();
    gibbs->add_option("-o,--output", out_path, "Label matrix CSV")->required();
    gibbs->add_option("--report", report_path, "Report path (default stdout)");

    std::string command;
    for (const auto& a : args) command += (command.empty() ? "" : " ") + a;

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().back()->help());
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }

    const auto start = std::chrono::steady_clock::now();
    Run run;
    try {
        auto& result = run.result();
        if (summarise->parsed()) {
            const LossKind kind = loss_option(loss_name);
            const auto cfg = greedy.config();
            const auto sample = run.read_sample(input);
            OptResult opt;
            if (exhaustive) {
                opt = exhaustive_minimize(sample, kind, limit);
                result["method"] = "exhaustive";
            } else {
                opt = greedy_minimize(sample, kind, cfg);
                result["method"] = "greedy";
                run.seed = cfg.seed;
            }
            result["loss"] = to_string(kind);
            result["items"] = sample.items();
            result["draws"] = sample.size();
            result["distinct_draws"] = sample.deduplicated().size();
            result.update(report::opt_result(opt));
            if (!partition_out.empty()) run.write(partition_out, io::label_row_csv(opt.partition));
        } else if (ball->parsed()) {
            const LossKind kind = loss_option(loss_name);
            if (!(alpha > 0.0 && alpha < 1.0)) throw usage_error("--alpha must lie in (0, 1)");
            const auto cfg = greedy.config();
            const auto sample = run.read_sample(input);
            const Partition center = resolve_center(run, center_spec, sample, kind, cfg);
            const auto cb = credible_ball(center, sample, kind, alpha);
            result.update(report::credible_ball(cb));
            if (!distances_out.empty()) {
                std::string csv = "draw_index,distance\n";
                for (std::size_t s = 0; s < cb.distances.size(); ++s)
                    csv += std::to_string(s) + "," + io::format_real(cb.distances[s]) + "\n";
                run.write(distances_out, csv);
            }
        } else if (hpd->parsed()) {
            const LossKind kind = loss_option(loss_name);
            if (!*gamma_opt && !*mass_opt) throw usage_error("exactly one of --gamma or --mass is required");
            HpdMode mode = *gamma_opt ? HpdMode::threshold(gamma) : HpdMode::mass(mass);
            if (*gamma_opt && !(gamma > 0.0 && gamma <= 1.0)) throw usage_error("--gamma must lie in (0, 1]");
            if (*mass_opt && !(mass > 0.0 && mass < 1.0)) throw usage_error("--mass must lie in (0, 1)");
            const auto cfg = greedy.config();
            const auto sample = run.read_sample(input);
            const Partition center = resolve_center(run, center_spec, sample, kind, cfg);
            const auto region = hpd_region(empirical_pmf(sample), center, kind, mode);
            result["center"] = report::labels(center);
            result["metric"] = to_string(kind);
            result["hpd"] = report::hpd(region);
            if (region.diffuse) err << "warning: " << region.warning << "\n";
        } else if (psm_cmd->parsed()) {
            const auto cfg = greedy.config();
            const auto sample = run.read_sample(input);
            const auto psm = compute_psm(sample);
            run.write(psm_out, io::psm_csv(psm));
            result["items"] = sample.items();
            result["draws"] = sample.size();
            result["psm_path"] = psm_out;
            if (vi_lb) {
                const auto opt = minimize_vi_lb(psm, cfg);
                json lb = report::opt_result(opt);
                lb["value"] = opt.epl;
                lb.erase("epl");
                lb["expected_vi"] = expected_loss(opt.partition, sample, LossKind::VI);
                result["vi_lower_bound"] = std::move(lb);
                run.seed = cfg.seed;
            }
        } else if (compare->parsed()) {
            const auto cfg = greedy.config();
            const auto sample = run.read_sample(input);
            json rows = json::array();
            for (LossKind kind : all_loss_kinds) {
                const auto opt = greedy_minimize(sample, kind, cfg);
                rows.push_back({{"loss", to_string(kind)},
                                {"K", opt.partition.num_clusters()},
                                {"epl", opt.epl},
                                {"partition", report::labels(opt.partition)}});
            }
            result["items"] = sample.items();
            result["draws"] = sample.size();
            result["rows"] = std::move(rows);
            run.seed = cfg.seed;
        } else if (sq->parsed()) {
            if (n_points == 0) throw usage_error("-n must be positive");
            const auto data = gen_uniform_square(n_points, sim_seed);
            run.write(out_path, io::dataset_csv(data));
            run.seed = sim_seed;
            result = {{"kind", "uniform-square"}, {"points", n_points}, {"dims", 2}, {"output", out_path}};
        } else if (gmm->parsed()) {
            if (n_points == 0) throw usage_error("-n must be positive");
            std::vector<std::vector<double>> centers;
            std::istringstream groups(centers_text);
            for (std::string group; groups >> group;) centers.push_back(parse_list(group, "--centers"));
            if (centers.empty()) throw usage_error("empty --centers");
            auto sds = parse_list(sds_text, "--sd");
            if (sds.size() == 1) sds.assign(centers.size(), sds.front());
            auto weights = weights_text.empty() ? std::vector<double>(centers.size(), 1.0 / centers.size())
                                                : parse_list(weights_text, "--weights");
            const auto generated = gen_gmm_data(n_points, centers, sds, weights, sim_seed);
            run.write(out_path, io::dataset_csv(generated.data));
            if (!labels_out.empty()) run.write(labels_out, io::label_row_csv(generated.labels));
            run.seed = sim_seed;
            result = {{"kind", "gmm"},
                      {"points", n_points},
                      {"dims", centers.front().size()},
                      {"true_K", generated.labels.num_clusters()},
                      {"output", out_path}};
        } else if (mm->parsed()) {
            const auto anchors = run.read_sample(anchors_path);
            AnchorSpec spec;
            spec.weights = weights_text.empty() ? std::vector<double>(anchors.size(), 1.0 / anchors.size())
                                                : parse_list(weights_text, "--weights");
            spec.flips = flips;
            spec.noise_fraction = noise_fraction;
            spec.anchors = anchors.draws();
            if (draws == 0) throw usage_error("--draws must be positive");
            spec.validate();
            const auto sample = gen_multimodal_sample(spec, draws, sim_seed);
            run.write(out_path, io::label_matrix_csv(sample));
            run.seed = sim_seed;
            result = {{"kind", "multimodal"},
                      {"anchors", anchors.size()},
                      {"draws", draws},
                      {"items", sample.items()},
                      {"output", out_path}};
        } else if (gibbs->parsed()) {
            const Dataset data = data_path.empty() ? gen_uniform_square(n_points, sim_seed)
                                                   : io::parse_dataset(run.read_input(data_path));
            gcfg.prior_mean = {mu0};
            gcfg.seed = sim_seed;
            gcfg.validate(data.cols());
            const auto sample = gibbs_gmm(data, gcfg);
            run.write(out_path, io::label_matrix_csv(sample));
            if (!data_out.empty()) run.write(data_out, io::dataset_csv(data));
            run.seed = sim_seed;
            std::vector<int> ks;
            for (const auto& d : sample.draws()) ks.push_back(d.num_clusters());
            result = {{"kind", "gibbs"},
                      {"points", data.rows()},
                      {"dims", data.cols()},
                      {"draws", sample.size()},
                      {"components", gcfg.components},
                      {"occupied_K_per_draw", ks},
                      {"output", out_path}};
        }

        run.commit();
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        const std::string text = run.report(command, ms).dump() + "\n";
        if (report_path.empty()) out << text;
        else io::write_file_atomic(report_path, text);
        return exit_ok;
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const parse_error& e) {
        err << "parse error: " << e.what() << "\n";
        return exit_parse;
    } catch (const refused_error& e) {
        err << "refused: " << e.what() << "\n";
        return exit_refused;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_io;
    }
}

} // namespace bayesclust::cli
