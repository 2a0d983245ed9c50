// cbias: run bias experiments and emit CSV + manifest, or run named checks.

#include "checks.hpp"

#include "cbias/dirichlet.hpp"
#include "cbias/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using cbias::experiment::ExperimentSpec;

struct KindOptions {
    const char* kind;
    const char* help;
    std::vector<std::pair<const char*, const char*>> keys;  // name, help
};

const std::vector<KindOptions>& kind_options() {
    static const std::vector<KindOptions> k = {
        {"dirichlet-bias", "weighted prime sums per residue class mod q",
         {{"q", "modulus"},
          {"a", "first class of a pair"},
          {"b", "second class of a pair"},
          {"classes", "comma list of classes, or 'all'"},
          {"s", "weight exponent (default 0.5)"}}},
        {"euler-product", "partial Euler products at s = 1/2", {{"character", "character label q:e1,e2,..."}}},
        {"split-bias", "split vs non-split primes in a quadratic field", {{"D", "fundamental discriminant"}}},
        {"class-bias", "prime ideals by ideal class", {{"D", "negative fundamental discriminant"}}},
        {"ff-bias", "irreducibles over F_q by class mod M",
         {{"q", "prime field size"}, {"M", "modulus coefficients c0 c1 ... (quoted)"}, {"n", "maximum degree"}}},
        {"ff-euler", "function-field Euler products",
         {{"q", "prime field size"},
          {"M", "modulus coefficients c0 c1 ... (quoted)"},
          {"character", "exponent list e1,e2,..."},
          {"n", "maximum degree"}}},
        {"tau-bias", "sums of tau(p)/p^6", {{"N", "number of coefficients (default: limit)"}, {"cache", "binary cache path"}}},
        {"density", "class densities and coset biases",
         {{"q", "modulus"}, {"subgroup", "comma list generating the subgroup"}}},
    };
    return k;
}

int run_experiment(const std::string& kind, const std::string& config,
                   const std::map<std::string, std::string>& values, bool resume) {
    ExperimentSpec spec;
    spec.resume = resume;
    if (!config.empty()) cbias::experiment::apply_values(spec, cbias::experiment::read_config_file(config));
    cbias::experiment::apply_values(spec, values);
    if (!kind.empty()) spec.kind = kind;
    if (spec.kind.empty()) throw cbias::experiment::SpecError("kind", "no experiment kind given");
    const auto manifest = cbias::experiment::run(spec);
    for (const auto& o : manifest.outputs)
        std::cout << (spec.out / o.file).string() << "  rows=" << o.rows << "  fnv1a64=" << o.checksum << "\n";
    std::cout << (spec.out / "manifest.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chebyshev bias and central Euler product experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    std::map<std::string, std::string> global;
    std::string config;
    bool resume = false;
    struct Global {
        const char* flag;
        const char* key;
        const char* help;
    };
    const Global globals[] = {
        {"--limit", "limit", "largest prime considered (1e9 style accepted)"},
        {"--x-min", "x-min", "first checkpoint"},
        {"--grid-ratio", "grid-ratio", "checkpoint ratio"},
        {"--threads", "threads", "sieve threads"},
        {"--segment-size", "segment-size", "odd numbers per sieve segment"},
        {"--journal-every", "journal-every", "journal every this many segments (0 = off)"},
        {"--out", "out", "output directory"},
    };
    std::map<std::string, std::string> raw;
    for (const auto& g : globals) app.add_option(g.flag, raw[g.key], g.help);
    app.add_option("--config", config, "key = value file; command-line flags take precedence");
    app.add_flag("--resume", resume, "continue from the journals in --out");

    std::map<std::string, std::map<std::string, std::string>> kind_values;
    std::map<std::string, CLI::App*> subs;
    for (const auto& k : kind_options()) {
        auto* sub = app.add_subcommand(k.kind, k.help);
        subs[k.kind] = sub;
        for (const auto& [name, help] : k.keys) sub->add_option(std::string("--") + name, kind_values[k.kind][name], help);
    }
    auto* run_cmd = app.add_subcommand("run", "run the experiment described by --config");

    auto* verify = app.add_subcommand("verify", "run named checks and print JSON results");
    std::vector<std::string> check_names;
    bool all = false, list = false;
    verify->add_option("checks", check_names, "check names");
    verify->add_flag("--all", all, "run every registered check");
    verify->add_flag("--list", list, "list registered checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            if (list) {
                for (const auto& c : cbias::checks::registry()) std::cout << c.name << "  " << c.summary << "\n";
                return 0;
            }
            if (all)
                for (const auto& c : cbias::checks::registry()) check_names.push_back(c.name);
            if (check_names.empty()) {
                std::cerr << "error: name a check or pass --all (see verify --list)\n";
                return 2;
            }
            bool ok = true;
            for (const auto& name : check_names) {
                const auto r = cbias::checks::run_check(name);
                std::cout << r.to_json() << std::endl;
                ok = ok && r.pass;
            }
            return ok ? 0 : 1;
        }

        for (const auto& g : globals)
            if (app.count(g.flag)) global[g.key] = raw[g.key];
        std::string kind;
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) {
                kind = name;
                for (const auto& [key, value] : kind_values[name])
                    if (sub->count("--" + key)) global[key] = value;
            }
        if (!run_cmd->parsed() && kind.empty()) return 2;
        return run_experiment(kind, config, global, resume);
    } catch (const cbias::experiment::SpecError& e) {
        std::cerr << "error: " << e.what() << " [key: " << e.key() << "]\n";
        return 2;
    } catch (const cbias::dirichlet::CentralZeroError& e) {
        std::cerr << "error: " << e.what()
                  << "\nThe central value L(1/2, chi) is numerically zero, so its vanishing order m is unknown and "
                     "the predicted slope cannot be formed. Choose a different modulus or character.\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
