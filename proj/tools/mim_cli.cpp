// mim: deterministic multi-phase inference simulator CLI.
//
// Exit codes: 0 success, 1 hypothesis fail, 2 config error, 3 runtime error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "mim/align.hpp"
#include "mim/canonical.hpp"
#include "mim/engine.hpp"
#include "mim/errors.hpp"
#include "mim/ib.hpp"
#include "mim/rd.hpp"
#include "mim/scenarios.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitHypothesisFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Seed precedence: --seed flag > MIM_SEED env > config value. The effective
// seed is folded back into the document so digests describe the actual run.
mim::RunConfig load_config(const std::string& path, const std::optional<std::uint64_t>& flag_seed) {
    mim::RunConfig cfg = mim::parse_config(path);
    std::optional<std::uint64_t> seed = flag_seed;
    if (!seed) {
        if (const char* env = std::getenv("MIM_SEED")) seed = std::strtoull(env, nullptr, 10);
    }
    if (seed) {
        cfg.seed = *seed;
        cfg.document["seed"] = *seed;
    }
    return cfg;
}

void write_record(const mim::RunRecord& record, const std::string& out_dir) {
    mim::emit_metrics(record, out_dir);
    mim::atomic_write(out_dir + "/record.json", record.canonical_bytes());
}

std::vector<double> parse_beta_spec(const std::string& spec) {
    // "lo:hi:count" sweeps; otherwise a comma list or single value.
    std::vector<double> betas;
    if (spec.find(':') != std::string::npos) {
        double lo, hi;
        int count;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 || count < 2)
            throw mim::SchemaError("--beta range must be lo:hi:count with count >= 2");
        for (int i = 0; i < count; ++i)
            betas.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
        return betas;
    }
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t next = spec.find(',', pos);
        if (next == std::string::npos) next = spec.size();
        betas.push_back(std::stod(spec.substr(pos, next - pos)));
        pos = next + 1;
    }
    if (betas.empty()) throw mim::SchemaError("--beta: empty");
    return betas;
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> grid;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t next = spec.find(',', pos);
        if (next == std::string::npos) next = spec.size();
        grid.push_back(std::stod(spec.substr(pos, next - pos)));
        pos = next + 1;
    }
    if (grid.empty()) throw mim::SchemaError("--grid: empty");
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic multi-phase inference simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed_flag;
    std::string hypothesis_id, sender_id, receiver_id, target_name, basis_id;
    std::string beta_spec = "1", grid_spec;
    std::size_t cardinality = 2;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "Run config JSON")->required();
        cmd->add_option("--seed", seed_flag, "Seed override (flag > MIM_SEED > config)");
    };

    CLI::App* validate = app.add_subcommand("validate", "Validate a config and exit");
    add_common(validate);

    CLI::App* run_cmd = app.add_subcommand("run", "Execute a run and emit record + metrics");
    add_common(run_cmd);
    run_cmd->add_option("--out", out_dir, "Output directory");

    CLI::App* hyp = app.add_subcommand("hypothesis", "Run a scenario and test its hypothesis");
    hyp->add_option("id", hypothesis_id, "h1|h2|h3|h4")->required();
    add_common(hyp);
    hyp->add_option("--out", out_dir, "Output directory");

    CLI::App* align_cmd = app.add_subcommand("align", "Optimize one sender-receiver alignment");
    add_common(align_cmd);
    align_cmd->add_option("--sender", sender_id, "Sender agent id")->required();
    align_cmd->add_option("--receiver", receiver_id, "Receiver agent id")->required();

    CLI::App* ib_cmd = app.add_subcommand("ib", "Bottleneck curve for one target/basis");
    add_common(ib_cmd);
    ib_cmd->add_option("--target", target_name, "Target name")->required();
    ib_cmd->add_option("--basis", basis_id, "Basis id")->required();
    ib_cmd->add_option("--cardinality", cardinality, "Representation alphabet size");
    ib_cmd->add_option("--beta", beta_spec, "Beta value, list, or lo:hi:count sweep");

    CLI::App* rd_cmd = app.add_subcommand("rd", "Rate-distortion curve of the observation marginal");
    add_common(rd_cmd);
    rd_cmd->add_option("--grid", grid_spec, "Comma-separated distortion budgets")->required();

    CLI11_PARSE(app, argc, argv);

    mim::RunConfig cfg;
    try {
        cfg = load_config(config_path, seed_flag);
    } catch (const mim::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (validate->parsed()) {
            std::cout << "ok " << mim::config_digest(cfg) << "\n";
            return kExitOk;
        }
        if (run_cmd->parsed()) {
            mim::RunRecord record = mim::run(cfg);
            write_record(record, out_dir);
            std::cout << record.digest() << "\n";
            return kExitOk;
        }
        if (hyp->parsed()) {
            if (cfg.scenario.value("hypothesis", std::string()) != hypothesis_id) {
                std::cerr << "config error: scenario.hypothesis does not match '" << hypothesis_id
                          << "'\n";
                return kExitConfig;
            }
            mim::RunRecord record = mim::run(cfg);
            const mim::HypothesisOutcome outcome = mim::evaluate_hypothesis(cfg, record);
            record.metrics["hypothesis"] = outcome.to_json();
            write_record(record, out_dir);
            std::cout << mim::canonical_dump(outcome.to_json());
            return outcome.pass ? kExitOk : kExitHypothesisFail;
        }
        if (align_cmd->parsed()) {
            mim::Simulation sim(cfg);
            const mim::AgentState& sender = sim.agent(sender_id);
            const mim::AgentState& receiver = sim.agent(receiver_id);
            std::size_t best = SIZE_MAX;
            for (std::size_t i = 0; i < sender.space.candidates.size(); ++i) {
                if (!sender.space.candidates[i].admissible) continue;
                if (best == SIZE_MAX ||
                    sender.profile.theta.foreground[i] > sender.profile.theta.foreground[best])
                    best = i;
            }
            if (best == SIZE_MAX) throw mim::EmptyAdmissibleSpace("sender has no admissible candidate");
            const mim::AlignmentReport report = mim::optimize_alignment(
                sim.world(), sim.registry(), sender.space.candidates[best], receiver.profile,
                receiver.space, sender.cfg.transmit_cap, cfg.engine.align);
            nlohmann::json out = {{"sender_candidate", sender.space.candidates[best].key},
                                  {"receiver_key", report.receiver_key},
                                  {"transformation_loss", report.transformation_loss},
                                  {"receiver_error", report.receiver_error},
                                  {"mu", report.mu},
                                  {"processable", report.processable},
                                  {"reason", report.reason},
                                  {"class", mim::align_class_name(report.classification)}};
            std::cout << mim::canonical_dump(out);
            return kExitOk;
        }
        if (ib_cmd->parsed()) {
            const mim::World world = mim::World::build(cfg.world_document);
            const mim::ConditioningBasis* basis = nullptr;
            for (const auto& b : cfg.bases)
                if (b.id == basis_id) basis = &b;
            if (!basis) throw mim::UnknownReferenceError("basis '" + basis_id + "'");
            const mim::JointDist joint =
                mim::feature_target_joint(world, world.target_index(target_name), *basis);
            std::cout << "series,x,y\n";
            char buf[80];
            for (double beta : parse_beta_spec(beta_spec)) {
                mim::IBOptions opts;
                opts.restarts = 3;
                const mim::IBResult res = mim::ib_solve(joint, cardinality, beta, opts, cfg.seed);
                std::snprintf(buf, sizeof(buf), "compression,%.17g,%.17g\n", beta, res.i_ot);
                std::cout << buf;
                std::snprintf(buf, sizeof(buf), "relevance,%.17g,%.17g\n", beta, res.i_ty);
                std::cout << buf;
            }
            return kExitOk;
        }
        if (rd_cmd->parsed()) {
            const mim::World world = mim::World::build(cfg.world_document);
            const auto grid = parse_grid(grid_spec);
            const auto curve =
                mim::rd_curve(world.obs_marginal(), mim::hamming_distortion(world.obs_size()),
                              world.obs_size(), grid);
            std::cout << "series,x,y\n";
            char buf[80];
            for (const mim::RDPoint& pt : curve) {
                std::snprintf(buf, sizeof(buf), "rate,%.17g,%.17g\n", pt.distortion, pt.rate);
                std::cout << buf;
            }
            return kExitOk;
        }
    } catch (const mim::SchemaError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const mim::UnknownReferenceError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const mim::NormalizationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}
