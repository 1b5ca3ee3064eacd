#include "entspan/classicality.hpp"
#include "entspan/effective.hpp"
#include "entspan/entanglement.hpp"
#include "entspan/exact.hpp"
#include "entspan/harness.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace entspan;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<int> parse_sites(const std::string& csv, int n_sites) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const int site1 = std::stoi(item);
        if (site1 < 1 || site1 > n_sites)
            throw std::invalid_argument("site " + item + " out of range 1.." +
                                        std::to_string(n_sites));
        out.push_back(site1 - 1);
    }
    return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir_opt,
            const std::string& solver_opt, long long seed_opt, int samples_opt, int threads_opt) {
    auto cfg = ExperimentConfig::from_file(config_path);
    if (!out_dir_opt.empty()) cfg.out_dir = out_dir_opt;
    if (!solver_opt.empty()) cfg.solver = solver_from_string(solver_opt);
    if (seed_opt >= 0) cfg.seed = static_cast<std::uint64_t>(seed_opt);
    if (samples_opt > 0) cfg.samples = samples_opt;
    if (threads_opt > 0) cfg.threads = threads_opt;

    const RunRecord rec = run(cfg);
    emit_csv(rec, cfg.out_dir);
    emit_json(rec, (std::filesystem::path(cfg.out_dir) / (cfg.experiment + "_record.json")).string());

    std::cout << cfg.experiment << ": done in " << rec.wall_seconds << " s\n";
    std::cout << rec.outputs.dump(2) << '\n';

    const auto failures = check_expectations(rec, cfg.expect);
    for (const auto& f : failures) std::cerr << "EXPECT FAILED: " << f << '\n';
    if (!failures.empty()) return 1;
    if (!cfg.expect.is_null() && !cfg.expect.empty())
        std::cout << cfg.expect.size() << " expectation(s) satisfied\n";
    return 0;
}

int cmd_classify(const std::string& model_path, const std::string& probes_csv) {
    const auto model = model_from_json(slurp(model_path));
    const auto sites = parse_sites(probes_csv, model.n_sites);
    if (sites.size() != 2) throw std::invalid_argument("--probes wants two sites, e.g. 1,8");
    const ProbePair probes{sites[0], sites[1]};

    const auto split = split_int_lf(model, probes);
    std::cout << "interaction terms: " << split.int_terms.size()
              << ", probe local fields: " << split.lf_terms.size() << '\n';
    const auto partition = find_classical_split(split.int_terms, probes);
    if (!partition) {
        std::cout << "no term-level split: the interaction is not classical at term "
                     "granularity (inconclusive for operator-level splits)\n";
        return 0;
    }
    std::cout << "classical split found; Theorem-1 guarantee: zero ground-state concurrence "
                 "for every choice of probe local fields\n";
    auto print_side = [&](const char* name, const std::vector<int>& idx) {
        std::cout << name << ":\n";
        for (int k : idx) {
            const auto& t = split.int_terms[k];
            std::cout << "  " << t.coeff << " *";
            for (const auto& f : t.factors)
                std::cout << ' ' << pauli_char(f.label) << (f.site + 1);
            std::cout << '\n';
        }
    };
    print_side("H_A (probe a side)", partition->a_terms);
    print_side("H_B (probe b side)", partition->b_terms);
    return 0;
}

int cmd_effective(const std::string& model_path, const std::string& probes_csv,
                  const std::string& mediator_csv, bool cancel) {
    const auto model = model_from_json(slurp(model_path));
    const auto psites = parse_sites(probes_csv, model.n_sites);
    if (psites.size() != 2) throw std::invalid_argument("--probes wants two sites");
    const ProbePair probes{psites[0], psites[1]};
    std::vector<int> mediator;
    if (mediator_csv.empty()) {
        for (int s = 0; s < model.n_sites; ++s)
            if (s != probes.a && s != probes.b) mediator.push_back(s);
    } else {
        mediator = parse_sites(mediator_csv, model.n_sites);
    }

    const auto split = make_perturbation_split(model, probes, mediator);
    std::printf("mediator: E0 = %.12g, gap = %.12g, ||H1|| = %.12g\n", split.e0, split.gap,
                split.h1_norm);
    if (split.h1_norm > 0.1 * split.gap)
        std::printf("warning: ||H1||/gap = %.3g exceeds 0.1; second-order coefficients are "
                    "not guaranteed accurate\n",
                    split.h1_norm / split.gap);

    const auto eff = second_order_effective(model, probes, mediator);
    std::printf("\neffective probe-pair Hamiltonian (sites %d and %d, paper labels):\n",
                probes.a + 1, probes.b + 1);
    const char axes[] = {'x', 'y', 'z'};
    std::printf("  h_a  = (% .10g, % .10g, % .10g)\n", eff.h_a[0], eff.h_a[1], eff.h_a[2]);
    std::printf("  h_b  = (% .10g, % .10g, % .10g)\n", eff.h_b[0], eff.h_b[1], eff.h_b[2]);
    std::printf("  J[i][j]:\n");
    for (int i = 0; i < 3; ++i)
        std::printf("    %c: % .10g % .10g % .10g\n", axes[i], eff.j(i, 0), eff.j(i, 1),
                    eff.j(i, 2));
    std::printf("  constant = % .10g\n", eff.constant);
    std::printf("order-1 fields (must vanish for weak-coupling entanglement):\n");
    std::printf("  probe a: (% .10g, % .10g, % .10g)\n", eff.order1_a[0], eff.order1_a[1],
                eff.order1_a[2]);
    std::printf("  probe b: (% .10g, % .10g, % .10g)\n", eff.order1_b[0], eff.order1_b[1],
                eff.order1_b[2]);

    if (cancel) {
        const auto fields = cancellation_fields(model, probes, mediator);
        if (fields.empty()) {
            std::printf("cancellation: nothing to cancel\n");
        } else {
            std::printf("cancellation fields to append:\n");
            for (const auto& t : fields) {
                std::printf("  %+.12g * %c%d\n", t.coeff, pauli_char(t.factors[0].label),
                            t.factors[0].site + 1);
            }
        }
    }
    return 0;
}

int cmd_discord_appendix(double h1z, double h3z, int grid, bool bits) {
    ExperimentConfig cfg;
    cfg.experiment = "discord-appendix";
    cfg.params = {{"h1z", h1z}, {"h3z", h3z}, {"grid", grid}};
    const auto rec = run(cfg);
    const double unit = bits ? std::log(2.0) : 1.0;
    const char* u = bits ? "bits" : "nats";

    std::printf("ground-state rho_13 (basis: sigma-z = -1 state first):\n");
    const auto& rho = rec.outputs.at("rho_re");
    for (int r = 0; r < 4; ++r) {
        std::printf("  ");
        for (int c = 0; c < 4; ++c) std::printf("% .6f ", rho[r][c].get<double>());
        std::printf("\n");
    }
    std::printf("concurrence          = %.3e\n", rec.outputs.at("concurrence").get<double>());
    std::printf("mutual information   = %.6f %s\n",
                rec.outputs.at("mutual_info").get<double>() / unit, u);
    std::printf("classical part       = %.6f %s\n",
                rec.outputs.at("classical_info").get<double>() / unit, u);
    std::printf("quantum discord      = %.6f %s\n", rec.outputs.at("discord").get<double>() / unit,
                u);
    std::printf("zero-discord blocks  = %s\n",
                rec.outputs.at("zero_discord").get<bool>() ? "yes" : "no");
    if (rec.outputs.contains("witness")) {
        std::printf("violated pair        = %s\n",
                    rec.outputs.at("witness").get<std::string>().c_str());
        std::printf("rho^11 rho^12        = [[0, %.5f], [%.5f, 0]]\n",
                    rec.outputs.at("block_product_01").get<double>(),
                    rec.outputs.at("block_product_10").get<double>());
    }
    return 0;
}

int cmd_dump(const std::string& preset, const nlohmann::json& opts, const std::string& out,
             const std::string& dense_out) {
    ChainModel model;
    if (preset == "xy-demo") {
        XYChainParams p;
        p.n = opts.value("n", 100);
        p.gamma = opts.value("gamma", 0.0);
        p.h0 = opts.value("h0", 100.0);
        model = build_xy_demo(p);
    } else if (preset == "xy-enhancement") {
        XYChainParams p;
        p.n = opts.value("n", 100);
        p.gamma = opts.value("gamma", 0.1);
        p.alpha = opts.value("alpha", 1);
        p.coupling = opts.value("coupling", 0.02);
        p.fields.assign(p.n - 2, opts.value("h0", 0.0));
        model = build_xy_enhancement(p);
    } else if (preset == "classical-zx-chain" || preset == "classical-zz-chain" ||
               preset == "nonclassical-zx-chain") {
        if (preset == "classical-zx-chain")
            model = build_general(4, {two_site(0, Pauli::Z, 1, Pauli::Z, 1.0),
                                      two_site(1, Pauli::X, 2, Pauli::X, 1.0),
                                      two_site(2, Pauli::X, 3, Pauli::X, 1.0)});
        else if (preset == "classical-zz-chain")
            model = build_general(3, {two_site(0, Pauli::Z, 1, Pauli::Z, 1.0),
                                      two_site(1, Pauli::Z, 2, Pauli::Z, 1.0)});
        else
            model = build_general(4, {two_site(0, Pauli::Z, 1, Pauli::Z, 1.0),
                                      two_site(1, Pauli::X, 2, Pauli::X, 1.0),
                                      two_site(2, Pauli::Z, 3, Pauli::Z, 1.0)});
    } else {
        throw std::invalid_argument("unknown preset '" + preset +
                                    "' (xy-demo, xy-enhancement, classical-zx-chain, "
                                    "classical-zz-chain, nonclassical-zx-chain)");
    }

    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    os << model_to_json(model) << '\n';
    std::cout << "wrote " << out << " (" << model.terms.size() << " terms on " << model.n_sites
              << " sites)\n";

    if (!dense_out.empty()) {
        const auto op = to_dense(model);
        nlohmann::json j;
        j["dim"] = op.dim();
        j["layout"] = "row-major, interleaved re/im";
        nlohmann::json data = nlohmann::json::array();
        for (Eigen::Index r = 0; r < op.dim(); ++r)
            for (Eigen::Index c = 0; c < op.dim(); ++c) {
                data.push_back(op.mat(r, c).real());
                data.push_back(op.mat(r, c).imag());
            }
        j["data"] = std::move(data);
        std::ofstream od(dense_out);
        if (!od) throw std::runtime_error("cannot write " + dense_out);
        od << j.dump() << '\n';
        std::cout << "wrote dense operator to " << dense_out << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entspan: long-distance entanglement toolkit for spin chains"};
    app.require_subcommand(1);

    // run
    std::string config_path, out_dir, solver_opt;
    long long seed_opt = -1;
    int samples_opt = 0, threads_opt = 0;
    auto* run_cmd = app.add_subcommand("run", "run an experiment described by a config JSON");
    run_cmd->add_option("config", config_path, "experiment config JSON")->required();
    run_cmd->add_option("--out", out_dir, "output directory (overrides config)");
    run_cmd->add_option("--seed", seed_opt, "seed override");
    run_cmd->add_option("--solver", solver_opt, "auto|exact|ff");
    run_cmd->add_option("--samples", samples_opt, "Monte Carlo sample override");
    run_cmd->add_option("--threads", threads_opt, "worker threads (default: all cores)");

    // classify
    std::string model_path, probes_csv;
    auto* classify_cmd =
        app.add_subcommand("classify", "search for a Theorem-1 classical split of a model");
    classify_cmd->add_option("model", model_path, "model JSON")->required();
    classify_cmd->add_option("--probes", probes_csv, "probe sites, 1-based, e.g. 1,8")->required();

    // effective
    std::string eff_model, eff_probes, eff_mediator;
    bool eff_cancel = false;
    auto* eff_cmd = app.add_subcommand(
        "effective", "second-order effective probe-pair Hamiltonian of a model");
    eff_cmd->add_option("model", eff_model, "model JSON")->required();
    eff_cmd->add_option("--probes", eff_probes, "probe sites, 1-based")->required();
    eff_cmd->add_option("--mediator", eff_mediator,
                        "mediator sites, 1-based (default: every other site)");
    eff_cmd->add_flag("--cancel", eff_cancel, "also print the cancellation fields");

    // discord-appendix
    double h1z = 1.0, h3z = 1.0;
    int grid = 64;
    bool bits = false;
    auto* da_cmd = app.add_subcommand(
        "discord-appendix", "three-spin Ising chain: zero concurrence, nonzero discord");
    da_cmd->add_option("--h1z", h1z, "probe-1 z field");
    da_cmd->add_option("--h3z", h3z, "probe-3 z field");
    da_cmd->add_option("--grid", grid, "measurement grid per angle");
    da_cmd->add_flag("--bits", bits, "report entropies in bits instead of nats");

    // dump
    std::string preset, dump_out = "model.json", dense_out;
    int dn = 0;
    double dgamma = -1, dh0 = -1, dcoupling = -1;
    int dalpha = 0;
    auto* dump_cmd = app.add_subcommand("dump", "write a named model preset as model JSON");
    dump_cmd->add_option("--preset", preset, "preset name")->required();
    dump_cmd->add_option("-o,--out", dump_out, "output path");
    dump_cmd->add_option("--n", dn, "chain length");
    dump_cmd->add_option("--gamma", dgamma, "anisotropy");
    dump_cmd->add_option("--h0", dh0, "field parameter");
    dump_cmd->add_option("--coupling", dcoupling, "probe coupling");
    dump_cmd->add_option("--alpha", dalpha, "mediator x-coupling sign");
    dump_cmd->add_option("--dense", dense_out, "also dump the dense operator (debug)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed())
            return cmd_run(config_path, out_dir, solver_opt, seed_opt, samples_opt, threads_opt);
        if (classify_cmd->parsed()) return cmd_classify(model_path, probes_csv);
        if (eff_cmd->parsed()) return cmd_effective(eff_model, eff_probes, eff_mediator, eff_cancel);
        if (da_cmd->parsed()) return cmd_discord_appendix(h1z, h3z, grid, bits);
        if (dump_cmd->parsed()) {
            nlohmann::json opts;
            if (dn > 0) opts["n"] = dn;
            if (dgamma >= 0) opts["gamma"] = dgamma;
            if (dh0 >= 0) opts["h0"] = dh0;
            if (dcoupling >= 0) opts["coupling"] = dcoupling;
            if (dalpha != 0) opts["alpha"] = dalpha;
            return cmd_dump(preset, opts, dump_out, dense_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
