// fedsim command-line entry point: run, check, report and hpo.
#include "fedsim/app/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
    using namespace fedsim::app;

    CLI::App app{"Deterministic virtual-time federated learning simulator"};
    app.require_subcommand(1);

    RunOptions run;
    std::uint64_t run_seed = 0;
    std::string run_out;
    auto *run_cmd = app.add_subcommand("run", "Run one course and write its artifacts");
    run_cmd->add_option("config,--config", run.config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
    auto *run_seed_opt = run_cmd->add_option("--seed", run_seed, "Override the config seed");
    auto *run_out_opt = run_cmd->add_option("--out", run_out, "Output directory (default: output.dir)");

    CheckOptions check;
    std::string dot;
    auto *check_cmd = app.add_subcommand("check", "Check that the handler bindings form a complete course");
    check_cmd->add_option("config,--config", check.config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
    auto *dot_opt = check_cmd->add_option("--dot", dot, "Write the flow graph in DOT format");

    ReportOptions report;
    std::string report_out;
    auto *report_cmd = app.add_subcommand("report", "Summarize a run log as CSV tables and JSON");
    report_cmd->add_option("runlog", report.runlog, "runlog.jsonl")->required()->check(CLI::ExistingFile);
    auto *report_out_opt = report_cmd->add_option("--out", report_out, "Report directory (default: <runlog dir>/report)");
    report_cmd->add_option("--target", report.targets, "Target accuracy for time-to-target (repeatable)");
    report_cmd->add_option("--quantile", report.quantile, "Quantile for client-wise statistics")
        ->check(CLI::Range(0.0, 1.0));

    HpoOptions hpo;
    std::uint64_t hpo_seed = 0;
    std::string hpo_out;
    auto *hpo_cmd = app.add_subcommand("hpo", "Search hyperparameters over FL courses");
    hpo_cmd->add_option("--config", hpo.config, "Base experiment config (YAML)")->required()->check(CLI::ExistingFile);
    hpo_cmd->add_option("--space", hpo.space, "Search space (YAML)")->required()->check(CLI::ExistingFile);
    hpo_cmd->add_option("--method", hpo.method, "rs or sha")->check(CLI::IsMember({"rs", "sha"}));
    hpo_cmd->add_option("--budget", hpo.budget, "Trials (rs) or initial configurations (sha)");
    hpo_cmd->add_option("--rounds", hpo.rounds, "FL rounds per trial (rs) or per rung (sha)");
    hpo_cmd->add_option("--rungs", hpo.rungs, "Successive halving rungs");
    hpo_cmd->add_option("--rate", hpo.rate, "Successive halving elimination rate");
    hpo_cmd->add_option("--workers", hpo.workers, "Parallel trials");
    auto *hpo_seed_opt = hpo_cmd->add_option("--seed", hpo_seed, "Override the config seed");
    auto *hpo_out_opt = hpo_cmd->add_option("--out", hpo_out, "Output directory (default: <output.dir>/hpo)");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed())
    {
        if (*run_seed_opt)
        {
            run.seed = run_seed;
        }
        if (*run_out_opt)
        {
            run.out = run_out;
        }
        return cmd_run(run, std::cout, std::cerr);
    }
    if (check_cmd->parsed())
    {
        if (*dot_opt)
        {
            check.dot = dot;
        }
        return cmd_check(check, std::cout, std::cerr);
    }
    if (report_cmd->parsed())
    {
        if (*report_out_opt)
        {
            report.out = report_out;
        }
        return cmd_report(report, std::cout, std::cerr);
    }
    if (*hpo_seed_opt)
    {
        hpo.seed = hpo_seed;
    }
    if (*hpo_out_opt)
    {
        hpo.out = hpo_out;
    }
    return cmd_hpo(hpo, std::cout, std::cerr);
}
