#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "ecprune/experiment.hpp"
#include "ecprune/threading.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Train-prune-finetune experiment runner for dense networks"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment spec and write a report");
    std::string spec_path;
    std::string out_path;
    std::string format = "csv";
    int jobs = 1;
    long long subset = -1;
    run->add_option("--spec", spec_path, "Experiment spec file (JSON)")->required();
    run->add_option("--out", out_path, "Report output path")->required();
    run->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--jobs", jobs, "Worker threads for the numeric kernels (1 = serial)")
        ->check(CLI::PositiveNumber);
    run->add_option("--subset", subset,
                    "Override the expectation subsample size (0 = use every sample)");

    CLI11_PARSE(app, argc, argv);

    try {
        ecprune::set_max_jobs(jobs);
        ecprune::ExperimentSpec spec = ecprune::load_experiment_spec(spec_path);
        if (subset >= 0) spec.expectation_subset = static_cast<std::size_t>(subset);

        const ecprune::ExperimentReport report = ecprune::run_experiment(spec);
        ecprune::write_report(report, out_path,
                              format == "csv" ? ecprune::ReportFormat::Csv
                                              : ecprune::ReportFormat::Json);

        std::size_t failed = 0;
        for (const auto& row : report.rows) {
            if (row.error.empty()) continue;
            ++failed;
            std::fprintf(stderr, "cell failed (%s, seed %llu, ratio %g): %s\n",
                         row.strategy.c_str(), static_cast<unsigned long long>(row.seed),
                         row.ratio, row.error.c_str());
        }
        std::fprintf(stderr, "%zu rows -> %s (%zu failed)\n", report.rows.size(),
                     out_path.c_str(), failed);
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
