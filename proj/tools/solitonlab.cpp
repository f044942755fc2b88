#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "solitonlab/cli.hpp"

namespace sl = solitonlab::cli;

int main(int argc, char** argv) {
    CLI::App app{"solitonlab: coupled Schrodinger ground states, thresholds and semiclassical diagnostics"};
    app.require_subcommand(1);

    struct RunArgs {
        std::string config;
        std::string out;
        std::uint64_t seed = 0;
    };
    std::vector<std::pair<sl::RunKind, RunArgs>> runs;
    for (auto k : {sl::RunKind::limit_ground, sl::RunKind::coupled_ground, sl::RunKind::thresholds,
                   sl::RunKind::sweep, sl::RunKind::pohozaev, sl::RunKind::verify})
        runs.push_back({k, {}});
    std::vector<CLI::App*> run_cmds;
    std::vector<CLI::Option*> seed_opts, out_opts;
    for (auto& [kind, a] : runs) {
        auto* sub = app.add_subcommand(sl::run_kind_name(kind), std::string("run kind ") + sl::run_kind_name(kind));
        sub->add_option("--config", a.config, "JSON config file")->required();
        out_opts.push_back(sub->add_option("--out", a.out, "output directory (overrides the config)"));
        seed_opts.push_back(sub->add_option("--seed", a.seed, "random seed recorded in the hash and manifest"));
        run_cmds.push_back(sub);
    }

    std::string plot_dir, plot_out;
    auto* plot = app.add_subcommand("plot", "render SVG figures from a report directory");
    plot->add_option("dir", plot_dir, "report directory")->required();
    auto* plot_out_opt = plot->add_option("--out", plot_out, "figure directory (default: the report directory)");

    std::string filter;
    bool as_json = false;
    auto* presets = app.add_subcommand("presets", "list potential presets");
    presets->add_option("filter", filter, "substring of the preset name");
    presets->add_flag("--json", as_json, "machine-readable listing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : sl::exit_validation;
    }

    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (!run_cmds[i]->parsed()) continue;
        const auto& [kind, a] = runs[i];
        sl::RunOverrides ov;
        if (*out_opts[i]) ov.out_dir = a.out;
        if (*seed_opts[i]) ov.seed = a.seed;
        ov.threads = sl::thread_budget();
        return sl::run(kind, a.config, ov);
    }
    if (plot->parsed()) {
        std::optional<std::filesystem::path> out;
        if (*plot_out_opt) out = plot_out;
        return sl::plot(plot_dir, out);
    }
    if (presets->parsed()) {
        std::cout << sl::presets_listing(filter, as_json);
        return sl::exit_ok;
    }
    return sl::exit_validation;
}
