#include "rislab/config.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"rislab: repeated interaction systems toolkit"};
    std::string task, config, out;
    std::uint64_t seed = 0;

    app.add_option("task", task, "spectrum|lambda|ldp|simulate|adiabatic|balance|x0")
        ->required()
        ->check(CLI::IsMember(rislab::kTasks));
    app.add_option("--config", config, "JSON config")->required();
    auto* seed_opt = app.add_option("--seed", seed, "overrides numeric.seed");
    app.add_option("--out", out, "overrides output.directory");
    CLI11_PARSE(app, argc, argv);

    rislab::RunConfig c;
    try {
        c = rislab::load_config(config);
    } catch (const rislab::config_error& e) {
        for (const auto& x : e.errors)
            std::cerr << "error=config path=" << x.path << " expected=\"" << x.expected << "\" found=\"" << x.found << "\"\n";
        return 2;
    }
    c.task = task;
    if (*seed_opt) c.numeric.seed = seed;
    if (!out.empty()) c.output.directory = out;
    c.source = rislab::serialize_config(c);

    auto r = rislab::run_task(c);
    if (r.status != 0) {
        std::cerr << r.reason << '\n';
        return r.status;
    }
    for (const auto& f : r.files) std::cout << c.output.directory << '/' << f << '\n';
    return 0;
}
