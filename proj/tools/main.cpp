// Command-line front end: gen-data, train, sample, eval, sweep, repro-table.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dabridge/cli_commands.hpp"

namespace {

using namespace dabridge;
using namespace dabridge::cli;

void add_net_options(CLI::App* cmd, NetArgs& net) {
    cmd->add_option("--hidden", net.hidden, "Hidden layer widths")->delimiter(',');
    cmd->add_option("--activation", [&net](const CLI::results_t& res) {
        if (res[0] == "tanh") {
            net.activation = Activation::tanh;
        } else if (res[0] == "relu") {
            net.activation = Activation::relu;
        } else {
            return false;
        }
        return true;
    }, "Activation: tanh or relu");
    cmd->add_option("--time-embedding", [&net](const CLI::results_t& res) {
        if (res[0] == "scalar") {
            net.time_embedding = TimeEmbedding::scalar_append;
        } else if (res[0] == "sinusoidal") {
            net.time_embedding = TimeEmbedding::sinusoidal;
        } else {
            return false;
        }
        return true;
    }, "Time input: scalar or sinusoidal");
    cmd->add_option("--sinusoidal-k", net.sinusoidal_k, "Sinusoidal frequency count");
    cmd->add_flag("--conditional", net.conditional, "Concatenate y to the network input");
}

void add_train_config_options(CLI::App* cmd, TrainConfig& cfg, std::string& config_file) {
    cmd->add_option("--config", config_file, "key=value training config file");
    cmd->add_option("--batch-size", cfg.batch_size, "Minibatch size");
    cmd->add_option("--steps", cfg.steps, "Optimizer steps");
    cmd->add_option("--lr", cfg.learning_rate, "Learning rate");
    cmd->add_option("--optimizer", [&cfg](const CLI::results_t& res) {
        if (res[0] == "sgd") {
            cfg.optimizer = OptimizerKind::sgd;
        } else if (res[0] == "adam") {
            cfg.optimizer = OptimizerKind::adam;
        } else {
            return false;
        }
        return true;
    }, "Optimizer: sgd or adam");
    cmd->add_option("--loss", [&cfg](const CLI::results_t& res) {
        if (res[0] == "l2") {
            cfg.loss_norm = LossNorm::l2_squared;
        } else if (res[0] == "l1") {
            cfg.loss_norm = LossNorm::l1;
        } else {
            return false;
        }
        return true;
    }, "Loss norm: l2 (squared) or l1");
    cmd->add_option("--seed", cfg.seed, "Master seed");
    cmd->add_option("--T", cfg.T, "Schedule step count");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brownian-bridge translation benchmark: data generation, dual-approximator "
                 "training, sampling and evaluation"};
    app.require_subcommand(1);

    // gen-data ---------------------------------------------------------------
    GenDataArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic paired dataset");
    gen_cmd->add_option("--task", gen.task, "gaussian, twomoons or blur")->required();
    gen_cmd->add_option("--n", gen.n, "Sample count");
    gen_cmd->add_option("--dim", gen.dim, "Dimension (gaussian)");
    gen_cmd->add_option("--mu0", gen.mu0, "Source mean (gaussian)");
    gen_cmd->add_option("--sigma0", gen.sigma0, "Source std (gaussian)");
    gen_cmd->add_option("--offset", gen.offset, "Pairing offset (gaussian)");
    gen_cmd->add_option("--noise-std", gen.noise_std, "Arc noise (twomoons)");
    gen_cmd->add_option("--side", gen.side, "Image side (blur)");
    gen_cmd->add_option("--blur-radius", gen.blur_radius, "Box blur radius (blur)");
    gen_cmd->add_option("--seed", gen.seed, "Generator seed");
    gen_cmd->add_option("--name", gen.name, "Output stem (defaults to task)");
    gen_cmd->add_option("--out", gen.out_dir, "Output directory");
    gen_cmd->add_flag("--scatter-csv", gen.scatter_csv, "Also export a CSV scatter file");

    // train ------------------------------------------------------------------
    TrainArgs train_args;
    std::string train_config_file;
    CLI::App* train_cmd = app.add_subcommand("train", "Train the forward/reverse approximators");
    train_cmd->add_option("--dataset", train_args.dataset, "DABT dataset path")->required();
    train_cmd->add_option("--which", train_args.which, "forward, reverse or both");
    add_train_config_options(train_cmd, train_args.config, train_config_file);
    add_net_options(train_cmd, train_args.net);
    train_cmd->add_option("--out", train_args.out_dir, "Output directory");

    // sample -----------------------------------------------------------------
    SampleArgs sample_args;
    CLI::App* sample_cmd = app.add_subcommand("sample", "Run a sampler over dataset inputs");
    sample_cmd->add_option("--dataset", sample_args.dataset, "DABT dataset path")->required();
    sample_cmd->add_option("--forward-ckpt", sample_args.forward_ckpt, "Forward checkpoint");
    sample_cmd->add_option("--reverse-ckpt", sample_args.reverse_ckpt, "Reverse checkpoint");
    sample_cmd->add_flag("--oracle", sample_args.oracle, "Use exact per-pair approximators");
    sample_cmd->add_option("--sampler", sample_args.sampler, "dual, dual-ct, sde or pf-ode");
    sample_cmd->add_option("--T", sample_args.T, "Sampling step count");
    sample_cmd->add_option("--trials", sample_args.trials, "Repeated trials per input");
    sample_cmd->add_option("--seed", sample_args.seed, "Sampling seed");
    sample_cmd->add_option("--tag", sample_args.tag, "Run directory name");
    sample_cmd->add_option("--out", sample_args.out_dir, "Output directory");
    sample_cmd->add_option("--max-inputs", sample_args.max_inputs, "Cap on evaluated inputs");
    sample_cmd->add_flag("--dump-trajectory", sample_args.dump_trajectory,
                         "Dump per-run trajectories");

    // eval -------------------------------------------------------------------
    EvalArgs eval_args;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Compute metrics over an output/reference file");
    eval_cmd->add_option("--pairs", eval_args.pairs, "DABT of (output, reference) rows")
        ->required();
    eval_cmd->add_option("--side", eval_args.side, "Image side (0 auto, -1 disable ssim)");
    eval_cmd->add_option("--label", eval_args.label, "Row label");
    eval_cmd->add_option("--out-csv", eval_args.out_csv, "Output CSV path");

    // sweep ------------------------------------------------------------------
    SweepArgs sweep_args;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Step-count sweep of the dual sampler");
    sweep_cmd->add_option("--dataset", sweep_args.dataset, "DABT dataset path")->required();
    sweep_cmd->add_option("--forward-ckpt", sweep_args.forward_ckpt, "Forward checkpoint");
    sweep_cmd->add_option("--reverse-ckpt", sweep_args.reverse_ckpt, "Reverse checkpoint");
    sweep_cmd->add_flag("--oracle", sweep_args.oracle, "Use exact per-pair approximators");
    sweep_cmd->add_option("--T", sweep_args.T, "Base schedule step count");
    sweep_cmd->add_option("--steps", sweep_args.steps, "Step counts to sweep")->delimiter(',');
    sweep_cmd->add_option("--trials", sweep_args.trials, "Trials per step count");
    sweep_cmd->add_flag("--early-stop", sweep_args.early_stop,
                        "Truncate a full run instead of re-discretizing");
    sweep_cmd->add_option("--seed", sweep_args.seed, "Sweep seed");
    sweep_cmd->add_option("--out", sweep_args.out_dir, "Output directory");
    sweep_cmd->add_option("--threads", sweep_args.threads, "Worker cap (0 = auto)");

    // repro-table ------------------------------------------------------------
    ReproTableArgs repro_args;
    CLI::App* repro_cmd =
        app.add_subcommand("repro-table", "End-to-end benchmark tables on the blur toy task");
    repro_cmd->add_option("--side", repro_args.side, "Image side");
    repro_cmd->add_option("--blur-radius", repro_args.blur_radius, "Box blur radius");
    repro_cmd->add_option("--n-train", repro_args.n_train, "Training pairs");
    repro_cmd->add_option("--n-holdout", repro_args.n_holdout, "Held-out pairs");
    repro_cmd->add_option("--train-steps", repro_args.train.steps, "Optimizer steps");
    repro_cmd->add_option("--batch-size", repro_args.train.batch_size, "Minibatch size");
    repro_cmd->add_option("--lr", repro_args.train.learning_rate, "Learning rate");
    repro_cmd->add_option("--T", repro_args.train.T, "Schedule step count");
    repro_cmd->add_option("--sweep-steps", repro_args.sweep_steps, "Step counts to sweep")
        ->delimiter(',');
    repro_cmd->add_option("--trials", repro_args.trials, "Trials per cell");
    repro_cmd->add_option("--dual-steps", repro_args.dual_steps, "Dual sampler step count");
    repro_cmd->add_option("--baseline-steps", repro_args.baseline_steps,
                          "Baseline sampler step count");
    repro_cmd->add_option("--seed", repro_args.master_seed, "Master seed");
    repro_cmd->add_option("--out", repro_args.out_dir, "Output directory");
    repro_cmd->add_option("--threads", repro_args.threads, "Worker cap (0 = auto)");
    add_net_options(repro_cmd, repro_args.net);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // 0
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (gen_cmd->parsed()) {
            const auto path = cmd_gen_data(gen);
            std::cout << "wrote " << path.string() << "\n";
        } else if (train_cmd->parsed()) {
            if (!train_config_file.empty()) {
                std::ifstream in(train_config_file);
                if (!in) throw std::runtime_error("cannot open config: " + train_config_file);
                const TrainConfig merged = parse_train_config(in);
                // Fields not set on the command line keep the file values.
                if (train_cmd->count("--batch-size") == 0) train_args.config.batch_size = merged.batch_size;
                if (train_cmd->count("--steps") == 0) train_args.config.steps = merged.steps;
                if (train_cmd->count("--lr") == 0) train_args.config.learning_rate = merged.learning_rate;
                if (train_cmd->count("--optimizer") == 0) train_args.config.optimizer = merged.optimizer;
                if (train_cmd->count("--loss") == 0) train_args.config.loss_norm = merged.loss_norm;
                if (train_cmd->count("--seed") == 0) train_args.config.seed = merged.seed;
                if (train_cmd->count("--T") == 0) train_args.config.T = merged.T;
            }
            const auto out = cmd_train(train_args);
            if (!out.forward_ckpt.empty()) std::cout << "wrote " << out.forward_ckpt.string() << "\n";
            if (!out.reverse_ckpt.empty()) std::cout << "wrote " << out.reverse_ckpt.string() << "\n";
        } else if (sample_cmd->parsed()) {
            const auto path = cmd_sample(sample_args);
            std::cout << "wrote " << path.string() << "\n";
        } else if (eval_cmd->parsed()) {
            const auto path = cmd_eval(eval_args);
            std::cout << "wrote " << path.string() << "\n";
        } else if (sweep_cmd->parsed()) {
            const auto path = cmd_sweep(sweep_args);
            std::cout << "wrote " << path.string() << "\n";
        } else if (repro_cmd->parsed()) {
            const auto out = cmd_repro_table(repro_args);
            std::cout << "wrote " << out.steps_table.string() << "\n";
            std::cout << "wrote " << out.samplers_table.string() << "\n";
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
