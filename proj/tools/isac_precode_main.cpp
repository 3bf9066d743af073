#include <cstdint>
#include <iostream>

#include "CLI11.hpp"
#include "isac/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"precoding benchmarks for random-signal sensing"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed_offset = 0;
    bool full_scale = false;
    CLI::App* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("--config", config_path, "experiment JSON")->required();
    run->add_option("--out", out_dir, "output directory override");
    run->add_option("--seed-offset", seed_offset, "added to every seed");
    run->add_flag("--full-scale", full_scale,
                  "table-scale antenna counts and frame grid");

    std::string rec_a, rec_b;
    CLI::App* cmp =
        app.add_subcommand("compare", "compare two convergence records");
    cmp->add_option("record_a", rec_a, "first record.json")->required();
    cmp->add_option("record_b", rec_b, "second record.json")->required();

    std::string csv_path, spec_path;
    CLI::App* plot =
        app.add_subcommand("plot", "render an SVG from a results.csv");
    plot->add_option("csv", csv_path, "results.csv path")->required();
    plot->add_option("--spec", spec_path, "plot spec JSON")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) {
            isac::bench::ExperimentConfig cfg =
                isac::bench::load_config_file(config_path);
            if (full_scale) isac::bench::apply_full_scale(cfg);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            const isac::bench::RunOutcome outcome =
                isac::bench::run(cfg, seed_offset);
            std::cout << "wrote " << outcome.csv_path << "\n";
            std::cout << "wrote " << outcome.record_path << "\n";
            for (const std::string& p : outcome.svg_paths)
                std::cout << "wrote " << p << "\n";
            if (outcome.cells_failed)
                std::cout << outcome.cells_failed << " of "
                          << outcome.cells_failed + outcome.cells_ok
                          << " cells failed; details in record.json\n";
        } else if (cmp->parsed()) {
            std::cout << isac::bench::compare_traces(rec_a, rec_b);
        } else {
            std::cout << isac::bench::emit_plot(csv_path, spec_path) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
