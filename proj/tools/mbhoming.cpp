// mbhoming: run one experiment and write its artifacts.
//
//   mbhoming exp2 --out runs/exp2 --seed-noise 4
//   mbhoming sim --config my.cfg --out runs/sim --sweep
//   mbhoming config exp3 > exp3.cfg

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mbhoming/config.hpp"
#include "mbhoming/experiment.hpp"

namespace {

struct RunArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed_world, seed_net, seed_noise;
    std::string mode;
    bool sweep = false;
    bool quiet = false;
};

mbhoming::RunConfig load(mbhoming::ExperimentId id, const RunArgs& a) {
    using namespace mbhoming;
    RunConfig c = RunConfig::defaults(id);
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw IoError("cannot open config " + a.config);
        c = read_config(in, id);
        if (c.experiment != id) {
            throw ConfigError("config " + a.config + " is for " + std::string(to_string(c.experiment)) +
                              ", not " + std::string(to_string(id)));
        }
    }
    if (a.seed_world) c.seeds.world = *a.seed_world;
    if (a.seed_net) c.seeds.net = *a.seed_net;
    if (a.seed_noise) c.seeds.noise = *a.seed_noise;
    if (!a.mode.empty()) c.mode = parse_mode(a.mode);
    c.validate();
    return c;
}

int run(mbhoming::ExperimentId id, const RunArgs& a) {
    using namespace mbhoming;
    const RunConfig c = load(id, a);
    const auto res = run_experiment(c, a.out, {a.sweep});
    if (!a.quiet) {
        for (const auto& [k, v] : res.summary) std::cout << k << ' ' << v << '\n';
    }
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << res.files.size() << " files to " << a.out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mushroom body visual homing: simulation and experiment harness"};
    app.require_subcommand(1);

    RunArgs args;
    for (const auto id : {mbhoming::ExperimentId::Sim, mbhoming::ExperimentId::Exp1, mbhoming::ExperimentId::Exp2,
                          mbhoming::ExperimentId::Exp3}) {
        const std::string name(mbhoming::to_string(id));
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", args.config, "config file (fields not given keep their defaults)")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", args.out, "output directory")->required();
        sub->add_option("--seed-world", args.seed_world, "world seed");
        sub->add_option("--seed-net", args.seed_net, "network seed");
        sub->add_option("--seed-noise", args.seed_noise, "noise seed");
        sub->add_option("--mode", args.mode, "control mode")->check(CLI::IsMember({"4mbon", "5mbon"}));
        sub->add_flag("-q,--quiet", args.quiet, "do not print the summary");
        if (id == mbhoming::ExperimentId::Sim) {
            sub->add_flag("--sweep", args.sweep, "also run the network size x resolution sweep");
        }
        sub->callback([id, &args] { throw CLI::RuntimeError(run(id, args)); });
    }

    std::string which = "sim";
    auto* cfg = app.add_subcommand("config", "print the default config of an experiment");
    cfg->add_option("experiment", which)->check(CLI::IsMember({"sim", "exp1", "exp2", "exp3"}));
    cfg->callback([&which] {
        mbhoming::write_config(std::cout, mbhoming::RunConfig::defaults(mbhoming::parse_experiment(which)));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::RuntimeError& e) {
        return e.get_exit_code();
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const mbhoming::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
