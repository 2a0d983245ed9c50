#include "cbias/experiment.hpp"

#include "cbias/dirichlet.hpp"
#include "cbias/function_field.hpp"
#include "cbias/quadratic.hpp"
#include "cbias/series_io.hpp"
#include "cbias/tau.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace cbias::experiment {

namespace fs = std::filesystem;
using nlohmann::json;
using ff::u32;

const std::vector<std::string>& kinds() {
    static const std::vector<std::string> k = {"dirichlet-bias", "euler-product", "split-bias", "class-bias",
                                               "ff-bias",        "ff-euler",      "tau-bias",   "density"};
    return k;
}

std::string ExperimentSpec::canonical() const {
    std::ostringstream os;
    os << "kind=" << kind << ";limit=" << limit << ";x_min=" << x_min << ";ratio=" << std::hexfloat
       << grid_ratio << std::defaultfloat << ";segment=" << segment_size;
    for (const auto& [k, v] : params) os << ";" << k << "=" << v;
    return os.str();
}

// ---- config ------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

u64 parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v.find_first_of("eE.") != std::string::npos) {
            // allow 1e9
            const long double d = std::stold(v, &pos);
            if (pos != v.size() || d < 0 || d != std::floor(d) || d > 1.8e19L) throw std::invalid_argument("");
            return static_cast<u64>(d);
        }
        if (!v.empty() && v[0] == '-') throw std::invalid_argument("");
        const u64 x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw SpecError(key, "invalid value for '" + key + "': expected a nonnegative integer, got \"" + v + "\"");
    }
}

long long parse_i64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw SpecError(key, "invalid value for '" + key + "': expected an integer, got \"" + v + "\"");
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw SpecError(key, "invalid value for '" + key + "': expected a number, got \"" + v + "\"");
    }
}

std::vector<u64> parse_list(const std::string& key, const std::string& v) {
    std::vector<u64> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_u64(key, item));
    }
    if (out.empty()) throw SpecError(key, "invalid value for '" + key + "': empty list");
    return out;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("config", "cannot read config file " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SpecError("config", path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

void apply_values(ExperimentSpec& spec, const std::map<std::string, std::string>& values) {
    for (const auto& [k, v] : values) {
        if (k == "kind") spec.kind = v;
        else if (k == "limit") spec.limit = parse_u64(k, v);
        else if (k == "x-min") spec.x_min = parse_u64(k, v);
        else if (k == "grid-ratio") spec.grid_ratio = parse_double(k, v);
        else if (k == "threads") spec.threads = static_cast<unsigned>(parse_u64(k, v));
        else if (k == "segment-size") spec.segment_size = parse_u64(k, v);
        else if (k == "journal-every") spec.journal_every = parse_u64(k, v);
        else if (k == "out") spec.out = v;
        else spec.params[k] = v;
    }
}

// ---- validation ----------------------------------------------------------------

namespace {

const std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>>& kind_keys() {
    // kind -> (required, optional)
    static const std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>> k = {
        {"dirichlet-bias", {{"q"}, {"a", "b", "classes", "s"}}},
        {"euler-product", {{"character"}, {}}},
        {"split-bias", {{"D"}, {}}},
        {"class-bias", {{"D"}, {}}},
        {"ff-bias", {{"q", "M", "n"}, {}}},
        {"ff-euler", {{"q", "M", "character", "n"}, {}}},
        {"tau-bias", {{}, {"N", "cache"}}},
        {"density", {{"q"}, {"subgroup"}}},
    };
    return k;
}

const std::string& param(const ExperimentSpec& s, const std::string& key) { return s.params.at(key); }

void check_unit(const std::string& key, u64 a, u64 q) {
    if (std::gcd(a % q, q) != 1)
        throw SpecError(key, "invalid value for '" + key + "': " + std::to_string(a) + " is not a unit mod " +
                                 std::to_string(q));
}

void validate_prime_grid(const ExperimentSpec& s, u64 floor) {
    if (s.limit < 2 || s.limit > primes::kMaxLimit)
        throw SpecError("limit", "invalid value for 'limit': need 2 <= limit <= 2^40");
    if (s.x_min < floor)
        throw SpecError("x-min", "invalid value for 'x-min': must be >= " + std::to_string(floor));
    if (s.x_min >= s.limit) throw SpecError("x-min", "invalid value for 'x-min': must be below limit");
    if (!(s.grid_ratio > 1.0)) throw SpecError("grid-ratio", "invalid value for 'grid-ratio': must be > 1");
}

ff::PolyFq parse_poly(const ExperimentSpec& s, u32 q) {
    try {
        auto M = ff::PolyFq::parse(q, param(s, "M"));
        if (M.degree() < 1) throw std::invalid_argument("degree must be >= 1");
        return M;
    } catch (const std::invalid_argument& e) {
        throw SpecError("M", std::string("invalid value for 'M': ") + e.what());
    }
}

u32 parse_field(const ExperimentSpec& s) {
    const u64 q = parse_u64("q", param(s, "q"));
    bool prime = q >= 2;
    for (u64 d = 2; d * d <= q && prime; ++d) prime = q % d != 0;
    if (!prime || q > 65521) throw SpecError("q", "invalid value for 'q': field size must be a prime below 65536");
    return static_cast<u32>(q);
}

}  // namespace

void validate(const ExperimentSpec& s) {
    const auto it = kind_keys().find(s.kind);
    if (it == kind_keys().end()) throw SpecError("kind", "unknown kind \"" + s.kind + "\"");
    const auto& [required, optional] = it->second;
    for (const auto& k : required)
        if (!s.params.count(k)) throw SpecError(k, "missing required key '" + k + "' for kind " + s.kind);
    for (const auto& [k, v] : s.params)
        if (!required.count(k) && !optional.count(k))
            throw SpecError(k, "unknown key '" + k + "' for kind " + s.kind);
    if (s.threads < 1 || s.threads > 1024) throw SpecError("threads", "invalid value for 'threads': need 1..1024");
    if (s.segment_size < 64) throw SpecError("segment-size", "invalid value for 'segment-size': need >= 64");

    if (s.kind == "dirichlet-bias" || s.kind == "density") {
        validate_prime_grid(s, 16);
        const u64 q = parse_u64("q", param(s, "q"));
        if (q < 3 || q > 1000000) throw SpecError("q", "invalid value for 'q': need 3 <= q <= 10^6");
        if (s.kind == "dirichlet-bias") {
            if (s.params.count("a") != s.params.count("b"))
                throw SpecError(s.params.count("a") ? "b" : "a", "keys 'a' and 'b' must be given together");
            if (s.params.count("a")) {
                const u64 a = parse_u64("a", param(s, "a")), b = parse_u64("b", param(s, "b"));
                check_unit("a", a, q);
                check_unit("b", b, q);
                if (a % q == b % q) throw SpecError("b", "invalid value for 'b': must differ from 'a' mod q");
            }
            if (s.params.count("classes") && param(s, "classes") != "all")
                for (u64 a : parse_list("classes", param(s, "classes"))) check_unit("classes", a, q);
            if (s.params.count("s")) {
                const double w = parse_double("s", param(s, "s"));
                if (!(w >= 0.0 && w <= 2.0)) throw SpecError("s", "invalid value for 's': need 0 <= s <= 2");
            }
        } else if (s.params.count("subgroup")) {
            for (u64 h : parse_list("subgroup", param(s, "subgroup"))) check_unit("subgroup", h, q);
        }
    } else if (s.kind == "euler-product") {
        validate_prime_grid(s, 16);
        try {
            const auto chi = dirichlet::parse_character(param(s, "character"));
            if (chi.is_principal()) throw std::invalid_argument("principal character");
        } catch (const std::invalid_argument& e) {
            throw SpecError("character", std::string("invalid value for 'character': ") + e.what());
        }
    } else if (s.kind == "split-bias" || s.kind == "class-bias") {
        validate_prime_grid(s, 16);
        const long long D = parse_i64("D", param(s, "D"));
        if (!quadratic::is_fundamental_discriminant(D))
            throw SpecError("D", "invalid value for 'D': " + std::to_string(D) + " is not a fundamental discriminant");
        if (s.kind == "class-bias" && D >= 0)
            throw SpecError("D", "invalid value for 'D': class-bias needs D < 0");
        if (D < -1000000 || D > 1000000) throw SpecError("D", "invalid value for 'D': |D| must be <= 10^6");
    } else if (s.kind == "ff-bias" || s.kind == "ff-euler") {
        const u32 q = parse_field(s);
        parse_poly(s, q);
        const u64 n = parse_u64("n", param(s, "n"));
        if (n < 1 || n > 32) throw SpecError("n", "invalid value for 'n': need 1 <= n <= 32");
        if (std::pow(static_cast<double>(q), static_cast<double>(n)) > 4294967296.0)
            throw SpecError("n", "invalid value for 'n': q^n exceeds the 2^32 enumeration budget");
        if (s.kind == "ff-euler") parse_list("character", param(s, "character"));
    } else if (s.kind == "tau-bias") {
        const u64 N = s.params.count("N") ? parse_u64("N", param(s, "N")) : s.limit;
        if (N < 32 || N > tau::kMaxOrder)
            throw SpecError(s.params.count("N") ? "N" : "limit", "invalid value for 'N': need 32 <= N <= 2^17");
        if (!(s.grid_ratio > 1.0)) throw SpecError("grid-ratio", "invalid value for 'grid-ratio': must be > 1");
        if (std::max<u64>(s.x_min, 16) >= N) throw SpecError("x-min", "invalid value for 'x-min': must be below N");
    }
}

// ---- journaled streaming --------------------------------------------------------

namespace {

std::string hexfloat(double v) {
    std::ostringstream os;
    os << std::hexfloat << v;
    return os.str();
}

template <typename Acc>
void stream_journaled(const ExperimentSpec& spec, primes::SieveConfig cfg, Acc& acc, const std::string& tag) {
    const bool journaling = spec.journal_every > 0;
    const fs::path path = spec.out / ("journal_" + tag + ".jsonl");
    const std::string id = io::hex64(io::fnv1a64(spec.canonical() + "|" + tag));

    if (spec.resume && fs::exists(path)) {
        std::ifstream in(path);
        std::string line, last;
        while (std::getline(in, line)) {
            try {
                const auto j = json::parse(line);
                if (j.at("spec").get<std::string>() == id) last = line;
            } catch (const std::exception&) {
                // torn final line from an interrupted run
            }
        }
        if (!last.empty()) {
            const auto j = json::parse(last);
            sums::AccumulatorState st;
            for (const auto& r : j.at("reals")) st.reals.push_back(std::strtod(r.get<std::string>().c_str(), nullptr));
            for (const auto& n : j.at("integers")) st.integers.push_back(n.get<u64>());
            acc.load_state(st);
            cfg.start = j.at("boundary").get<u64>();
        }
    } else if (journaling && fs::exists(path)) {
        fs::remove(path);
    }
    if (cfg.start > cfg.limit) return;

    std::ofstream journal;
    if (journaling) {
        fs::create_directories(spec.out);
        journal.open(path, std::ios::app);
    }
    u64 segments = 0;
    primes::stream_primes(
        cfg, [&acc](u64 p) { acc(p); },
        [&](u64 hi) {
            ++segments;
            if (!journaling || (segments % spec.journal_every != 0 && hi <= cfg.limit)) return;
            const auto st = acc.save_state();
            json j;
            j["spec"] = id;
            j["boundary"] = hi;
            j["reals"] = json::array();
            for (double r : st.reals) j["reals"].push_back(hexfloat(r));
            j["integers"] = st.integers;
            journal << j.dump() << '\n' << std::flush;
        });
}

primes::SieveConfig sieve_config(const ExperimentSpec& s) {
    primes::SieveConfig cfg;
    cfg.limit = s.limit;
    cfg.segment_size = s.segment_size;
    cfg.thread_count = s.threads;
    return cfg;
}

std::vector<double> loglog_line(const primes::CheckpointGrid& g, double slope) {
    std::vector<double> v(g.points.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = slope * sums::scale_value(sums::Scale::LogLog, static_cast<double>(g.points[i]));
    return v;
}

std::vector<NamedSeries> run_dirichlet(const ExperimentSpec& s) {
    const u64 q = parse_u64("q", param(s, "q"));
    const double w = s.params.count("s") ? parse_double("s", param(s, "s")) : 0.5;
    const auto grid = primes::make_grid(s.x_min, s.limit, s.grid_ratio);
    const auto classifier = dirichlet::residue_classifier(q);
    sums::SeriesAccumulator acc(classifier, w, grid);
    stream_journaled(s, sieve_config(s), acc, "classes");
    auto raw = acc.finish(s.limit);
    raw.metadata["q"] = std::to_string(q);

    std::vector<NamedSeries> out{{"classes.csv", raw}};
    const bool predict = w == 0.5;
    const auto units = dirichlet::UnitGroup(q).units();

    u64 a = 0, b = 0;
    if (s.params.count("a")) {
        a = parse_u64("a", param(s, "a")) % q;
        b = parse_u64("b", param(s, "b")) % q;
    } else if (!s.params.count("classes") && units.size() == 2) {
        a = units[0];
        b = units[1];
    }
    if (a && b) {
        const auto ca = sums::class_column(std::to_string(a)), cb = sums::class_column(std::to_string(b));
        sums::CheckpointSeries pair = raw;
        if (predict) {
            const double slope = dirichlet::predict_pair_slope(q, a, b);
            pair.add_column("prediction", loglog_line(grid, slope));
            pair = sums::residual_series(pair, {{cb, 1.0}, {ca, -1.0}}, slope, sums::Scale::LogLog, "difference",
                                         "residual");
            pair.metadata["slope"] = io::format_number(slope);
        } else {
            std::vector<double> d(grid.points.size());
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = raw.column(cb)[i] - raw.column(ca)[i];
            pair.add_column("difference", std::move(d));
        }
        out.push_back({"pair_" + std::to_string(a) + "_" + std::to_string(b) + ".csv", std::move(pair)});
    }

    if (s.params.count("classes")) {
        std::vector<u64> classes =
            param(s, "classes") == "all" ? units : parse_list("classes", param(s, "classes"));
        std::map<u64, double> slopes;
        if (predict)
            for (const auto& [unit, pred] : dirichlet::predict_all_class_slopes(q)) slopes[unit] = pred.total;
        const auto phi = static_cast<double>(units.size());
        for (u64 c : classes) {
            c %= q;
            const auto col = sums::class_column(std::to_string(c));
            sums::CheckpointSeries one;
            one.grid = grid;
            one.add_column(sums::kTotalColumn, raw.column(sums::kTotalColumn));
            one.add_column(col, raw.column(col));
            if (predict) {
                one.add_column("prediction", loglog_line(grid, slopes.at(c)));
                one = sums::residual_series(one, {{sums::kTotalColumn, 1.0}, {col, -phi}}, slopes.at(c),
                                            sums::Scale::LogLog, "S", "residual");
                one.metadata["slope"] = io::format_number(slopes.at(c));
            }
            one.metadata["q"] = std::to_string(q);
            one.metadata["a"] = std::to_string(c);
            out.push_back({"class_" + std::to_string(c) + ".csv", std::move(one)});
        }
    }
    return out;
}

std::vector<NamedSeries> run_euler(const ExperimentSpec& s) {
    auto chi = dirichlet::parse_character(param(s, "character"));
    const auto grid = primes::make_grid(s.x_min, s.limit, s.grid_ratio);
    const auto lval = dirichlet::l_half(chi);
    const auto target = lval * (chi.nu() ? std::sqrt(2.0) : 1.0);
    dirichlet::EulerProductAccumulator acc(chi, grid);
    stream_journaled(s, sieve_config(s), acc, "euler");
    auto series = acc.finish(s.limit);
    series.add_column("target_re", std::vector<double>(grid.points.size(), target.real()));
    series.add_column("target_im", std::vector<double>(grid.points.size(), target.imag()));
    series.metadata["m"] = "0";
    series.metadata["l_half_re"] = hexfloat(lval.real());
    series.metadata["l_half_im"] = hexfloat(lval.imag());
    return {{"euler.csv", dirichlet::drh_residual(series, chi)}};
}

std::vector<NamedSeries> run_density(const ExperimentSpec& s) {
    const u64 q = parse_u64("q", param(s, "q"));
    const std::vector<u64> h = s.params.count("subgroup") ? parse_list("subgroup", param(s, "subgroup"))
                                                          : std::vector<u64>{1};
    const auto grid = primes::make_grid(s.x_min, s.limit, s.grid_ratio);
    const auto classifier = dirichlet::coset_classifier(q, h);

    sums::SeriesAccumulator counts_acc(classifier, 0.0, grid);
    stream_journaled(s, sieve_config(s), counts_acc, "counts");
    const auto counts = counts_acc.finish(s.limit);
    const auto report = sums::density_report(counts, classifier);
    sums::CheckpointSeries dens = counts;
    for (std::size_t k = 0; k < report.labels.size(); ++k) {
        std::vector<double> r(grid.points.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] = report.ratios[k][i] ? *report.ratios[k][i] : std::nan("");
        dens.add_column("ratio:" + report.labels[k], std::move(r));
        dens.metadata["expected:" + report.labels[k]] = io::format_number(report.expected[k]);
    }

    sums::SeriesAccumulator w_acc(classifier, 0.5, grid);
    stream_journaled(s, sieve_config(s), w_acc, "weights");
    auto bias = w_acc.finish(s.limit);
    const auto slopes = dirichlet::coset_slopes(q, h);
    const auto index = static_cast<double>(classifier.labels.size());
    for (std::size_t k = 0; k < classifier.labels.size(); ++k) {
        const auto& label = classifier.labels[k];
        bias.add_column("prediction:" + label, loglog_line(grid, slopes[k]));
        bias = sums::residual_series(bias, {{sums::kTotalColumn, 1.0}, {sums::class_column(label), -index}},
                                     slopes[k], sums::Scale::LogLog, "S:" + label, "residual:" + label);
    }
    return {{"density.csv", std::move(dens)}, {"bias.csv", std::move(bias)}};
}

std::vector<NamedSeries> run_tau(const ExperimentSpec& s) {
    const u64 N = s.params.count("N") ? parse_u64("N", param(s, "N")) : s.limit;
    tau::DeltaExpansion delta;
    bool loaded = false;
    if (s.params.count("cache") && fs::exists(param(s, "cache"))) {
        delta = tau::read_cache(param(s, "cache"));
        loaded = delta.N >= N;
    }
    if (!loaded) {
        delta = tau::delta_coefficients(N);
        if (s.params.count("cache")) tau::write_cache(param(s, "cache"), delta);
    }
    const auto grid = primes::make_grid(std::max<u64>(s.x_min, 16), N, s.grid_ratio);
    return {{"tau.csv", tau::tau_bias_series(delta, grid)}};
}

}  // namespace

std::vector<NamedSeries> compute(const ExperimentSpec& s) {
    validate(s);
    if (s.kind == "dirichlet-bias") return run_dirichlet(s);
    if (s.kind == "euler-product") return run_euler(s);
    if (s.kind == "density") return run_density(s);
    if (s.kind == "tau-bias") return run_tau(s);
    if (s.kind == "split-bias" || s.kind == "class-bias") {
        const long long D = parse_i64("D", param(s, "D"));
        const auto grid = primes::make_grid(s.x_min, s.limit, s.grid_ratio);
        if (s.kind == "split-bias") return {{"split.csv", quadratic::splitting_bias_series(D, grid, sieve_config(s))}};
        return {{"class.csv", quadratic::principal_bias_series(D, grid, sieve_config(s))}};
    }
    const u32 q = parse_field(s);
    const auto M = parse_poly(s, q);
    const auto n = static_cast<unsigned>(parse_u64("n", param(s, "n")));
    if (s.kind == "ff-bias") return {{"ff_bias.csv", ff::ff_bias_series(q, M, n)}};
    // ff-euler
    const auto table = ff::unit_class_table(q, M);
    std::vector<u32> e;
    for (u64 x : parse_list("character", param(s, "character"))) e.push_back(static_cast<u32>(x));
    std::unique_ptr<ff::FFCharacter> chi;
    try {
        chi = std::make_unique<ff::FFCharacter>(table, e);
    } catch (const std::invalid_argument& err) {
        throw SpecError("character", std::string("invalid value for 'character': ") + err.what());
    }
    return {{"ff_euler.csv", ff::ff_euler_product(*chi, n)}};
}

namespace {
std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}
}  // namespace

RunManifest run(const ExperimentSpec& s) {
    RunManifest m;
    m.started = utc_now();
    validate(s);
    const auto series = compute(s);
    fs::create_directories(s.out);

    json outputs = json::array();
    for (const auto& ns : series) {
        const auto sum = io::write_file(s.out / ns.file, io::to_csv(ns.series));
        m.outputs.push_back({ns.file, ns.series.size(), io::hex64(sum)});
        json o;
        o["file"] = ns.file;
        o["rows"] = ns.series.size();
        o["x_label"] = ns.series.x_label;
        o["fnv1a64"] = io::hex64(sum);
        o["metadata"] = ns.series.metadata;
        json cols = json::array();
        for (const auto& c : ns.series.columns) cols.push_back(c.name);
        o["columns"] = cols;
        outputs.push_back(o);
    }
    m.finished = utc_now();

    json j;
    j["schema"] = kManifestSchema;
    j["version"] = kVersion;
    j["spec"] = {{"kind", s.kind},
                 {"params", s.params},
                 {"limit", s.limit},
                 {"grid", {{"x_min", s.x_min}, {"x_max", s.limit}, {"ratio", s.grid_ratio}}}};
    j["sieve"] = {{"limit", s.limit}, {"segment_size", s.segment_size}, {"threads", s.threads}};
    j["started"] = m.started;
    j["finished"] = m.finished;
    j["outputs"] = outputs;
    json journals = json::array();
    for (const auto& tag : {"classes", "euler", "counts", "weights"}) {
        const auto p = s.out / (std::string("journal_") + tag + ".jsonl");
        if (fs::exists(p)) journals.push_back(p.filename().string());
    }
    j["journals"] = journals;
    m.json = j.dump(2) + "\n";
    io::write_file(s.out / "manifest.json", m.json);
    return m;
}

}  // namespace cbias::experiment
