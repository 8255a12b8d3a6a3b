#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"

int main(int argc, char** argv)
{
    using qgraph::cli::RunConfig;
    CLI::App app{"Spectral and nodal-partition analysis of quantum graphs"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string format = "csv";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("graph", cfg.input, "graph file")->required();
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--format", format, "table separator")->check(CLI::IsMember({"csv", "tsv"}));
        sub->add_option("--tol-root", cfg.tol_root, "eigenvalue tolerance");
    };
    auto add_range = [&](CLI::App* sub) {
        sub->add_option("--n-from", cfg.n_from, "first eigenvalue index");
        sub->add_option("--n-to", cfg.n_to, "last eigenvalue index");
    };
    auto add_m = [&](CLI::App* sub) {
        sub->add_option_function<int>("--m", [&](int m) { cfg.m = m; }, "number of partition points");
    };

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues with nodal counts");
    add_common(spectrum);
    spectrum->add_option("--count", cfg.count, "number of eigenvalues");

    auto* scan = app.add_subcommand("scan", "Lambda over a grid on the torus");
    add_common(scan);
    add_m(scan);
    scan->add_option("--grid", cfg.grid, "points per angle");
    scan->add_option_function<int>("--line", [&](int j) { cfg.line = j; }, "scan angle j only, others at 0");

    auto* verify = app.add_subcommand("verify", "Morse index against nodal deficiency");
    add_common(verify);
    add_range(verify);
    verify->add_option("--tol-grad", cfg.tol_grad, "gradient tolerance at the critical point");
    verify->add_option("--fd-step", cfg.fd_step, "Hessian difference step");

    auto* interlace = app.add_subcommand("interlace", "eigenvalue interlacing under coupling changes");
    add_common(interlace);
    interlace->add_option("--n-to", cfg.n_to, "eigenvalues compared per case (at most 20)");

    auto* histogram = app.add_subcommand("histogram", "distribution of nodal deficiencies");
    add_common(histogram);
    add_range(histogram);

    auto* critical = app.add_subcommand("critical", "Newton search for critical points from a seed grid");
    add_common(critical);
    add_m(critical);
    critical->add_option("--grid", cfg.grid, "seeds per angle");
    critical->add_option("--fd-step", cfg.fd_step, "Hessian difference step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : qgraph::cli::input_error;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    cfg.separator = format == "tsv" ? '\t' : ',';
    if (cfg.command == "critical" && !critical->count("--grid")) cfg.grid = 32;
    return qgraph::cli::run(cfg, std::cerr);
}
