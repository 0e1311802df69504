#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hqas/curve.hpp"
#include "hqas/engine.hpp"
#include "hqas/errors.hpp"
#include "hqas/psi.hpp"
#include "hqas/table_io.hpp"
#include "hqas/wgl.hpp"

using namespace hqas;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct RunConfig {
    std::string rs;
    std::string cycle;
    std::string curve_path;
    int chi_max = 2;
    int q_max = 0;
    int probe = 0;
    int r_max = 0;
    std::string out;
    std::string format = "json";
    bool reduced = false;
    bool force = false;
    bool crosscapped = false;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, sep)) out.push_back(part);
    return out;
}

int parse_int(const std::string& text, const std::string& what) {
    try {
        size_t used = 0;
        int v = std::stoi(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    fail("BadInput", "cannot parse " + what + " '" + text + "'");
}

LocalCurve rs_curve(int r, int s) {
    LocalCurve c;
    c.components.push_back(CurveComponent{r, {{s, Rat(-1)}}});
    return c;
}

LocalCurve read_curve(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("BadInput", "cannot open curve file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& ex) {
        fail("BadInput", std::string("curve file is not JSON: ") + ex.what());
    }
    return curve_from_json(doc);
}

std::pair<int, int> parse_rs(const std::string& text) {
    auto parts = split(text, ',');
    if (parts.size() != 2) fail("BadInput", "--rs expects r,s");
    return {parse_int(parts[0], "r"), parse_int(parts[1], "s")};
}

// A source resolved from the command line: the operators, plus the curve
// when the source has one.
struct Source {
    StructureSpec spec;
    std::optional<LocalCurve> curve;
    int default_q_max = 1;
};

Source resolve(const RunConfig& cfg, bool want_curve) {
    const int given = !cfg.rs.empty() + !cfg.cycle.empty() + !cfg.curve_path.empty();
    if (given != 1) fail("BadInput", "give exactly one of --rs, --cycle, --curve");
    Source src;
    if (!cfg.rs.empty()) {
        auto [r, s] = parse_rs(cfg.rs);
        src.spec = build_coxeter(r, s, cfg.reduced, cfg.force);
        if (want_curve) src.curve = rs_curve(r, s);
        src.default_q_max = 2 * s;
    } else if (!cfg.cycle.empty()) {
        auto parts = split(cfg.cycle, ',');
        if (parts.size() != 3) fail("BadInput", "--cycle expects r,s,q");
        const int s = parse_int(parts[1], "s");
        src.spec = build_cycle_rm1(parse_int(parts[0], "r"), s, parse_rat(parts[2]));
        src.default_q_max = s;
    } else {
        LocalCurve c = read_curve(cfg.curve_path);
        src.spec = build_operators(c, cfg.force);
        int s_max = 1;
        for (int a = 1; a <= c.size(); ++a) s_max = std::max(s_max, s_alpha(c, a));
        src.default_q_max = 2 * s_max;
        src.curve = std::move(c);
    }
    if (cfg.crosscapped) src.spec.crosscapped = true;
    return src;
}

int q_max_of(const RunConfig& cfg, const Source& src) { return cfg.q_max > 0 ? cfg.q_max : src.default_q_max; }

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(cfg.out);
    if (!out) fail("BadInput", "cannot write '" + cfg.out + "'");
    out << text;
}

json labels_json(const std::vector<Label>& idx) {
    json out = json::array();
    for (const auto& l : idx) out.push_back(to_string(l));
    return out;
}

int finish(const RunConfig& cfg, json report) {
    const bool clean = report.value("clean", false);
    emit(cfg, report.dump(2) + "\n");
    return clean ? kExitClean : kExitFailed;
}

const LocalCurve& need_curve(const Source& src, const std::string& suite) {
    if (!src.curve) fail("BadInput", suite + " needs --rs or --curve");
    return *src.curve;
}

// Entry-wise comparison over the union of both key sets.
json compare_tables(const FTable& expected, const FTable& actual, long& checked, long& bad) {
    json mismatches = json::array();
    auto visit = [&](const FKey& k) {
        ++checked;
        auto a = expected.lookup(k.g2, k.idx);
        auto b = actual.lookup(k.g2, k.idx);
        if (a && b && *a == *b) return;
        ++bad;
        if (mismatches.size() < 20)
            mismatches.push_back({{"g", to_string(HalfInt{k.g2})},
                                  {"idx", labels_json(k.idx)},
                                  {"expected", a ? to_string(*a) : "undetermined"},
                                  {"actual", b ? to_string(*b) : "undetermined"}});
    };
    for (const auto& [k, v] : expected.entries) visit(k);
    for (const auto& [k, v] : actual.entries)
        if (!expected.entries.count(k)) visit(k);
    return mismatches;
}

int check_symmetry_suite(const RunConfig& cfg) {
    Source src = resolve(cfg, false);
    Engine e(src.spec);
    const int q = q_max_of(cfg, src);
    auto violations = e.check_symmetry(cfg.chi_max, q);
    json list = json::array();
    for (const auto& v : violations) {
        json values = json::array();
        for (const auto& [label, value] : v.values)
            values.push_back({{"distinguished", to_string(label)}, {"value", to_string(value)}});
        list.push_back({{"g", to_string(HalfInt{v.g2})}, {"idx", labels_json(v.idx)}, {"values", values}});
    }
    return finish(cfg, {{"suite", "symmetry"},
                        {"structure", src.spec.name},
                        {"chi_max", cfg.chi_max},
                        {"q_max", q},
                        {"clean", violations.empty()},
                        {"violations", list}});
}

int check_annihilate_suite(const RunConfig& cfg) {
    Source src = resolve(cfg, false);
    Engine e(src.spec);
    const int q = q_max_of(cfg, src);
    const int probe = cfg.probe > 0 ? cfg.probe : q;
    FTable F = e.compute_all(cfg.chi_max, std::max(q, probe));
    auto residuals = e.check_annihilation(F, cfg.chi_max, probe);
    json list = json::array();
    for (const auto& r : residuals)
        list.push_back({{"operator", r.op},
                        {"label", to_string(r.label)},
                        {"g", to_string(HalfInt{r.g2})},
                        {"beta", labels_json(r.beta)},
                        {"residual", to_string(r.residual)}});
    return finish(cfg, {{"suite", "annihilate"},
                        {"structure", src.spec.name},
                        {"chi_max", cfg.chi_max},
                        {"probe", probe},
                        {"clean", residuals.empty()},
                        {"residuals", list}});
}

int check_loop_suite(const RunConfig& cfg) {
    Source src = resolve(cfg, true);
    const LocalCurve& curve = need_curve(src, "loop-eq");
    const int q = q_max_of(cfg, src);
    std::vector<LoopKey> keys;
    std::vector<Label> pool;
    for (int a = 1; a <= curve.size(); ++a) {
        if (!curve.phi.empty()) {
            bool touched = false;
            for (const auto& [key, v] : curve.phi.entries())
                if (key.first.first == a || key.second.first == a) touched = true;
            if (touched) continue;
        }
        for (int i = 1; i <= curve.component(a).r; ++i)
            for (int k = 0; k <= 3; ++k) keys.push_back({a, i, k});
        for (int l = 1; l <= 3; ++l) pool.insert(pool.end(), 2, Label{a, l});
    }
    if (keys.empty()) fail("UnsupportedPolarization", "every component is touched by phi");
    auto mismatches = check_loop_vs_conjugation(curve, keys, pool, q);
    json list = json::array();
    for (const auto& m : mismatches)
        list.push_back({{"alpha", m.key.alpha},
                        {"i", m.key.i},
                        {"k", m.key.k},
                        {"term", m.term},
                        {"loop", to_string(m.loop_value)},
                        {"conjugation", to_string(m.conjugation_value)}});
    return finish(cfg, {{"suite", "loop-eq"},
                        {"keys", keys.size()},
                        {"annihilator_cap", q},
                        {"clean", mismatches.empty()},
                        {"mismatches", list}});
}

int check_givental_suite(const RunConfig& cfg) {
    Source src = resolve(cfg, true);
    const LocalCurve& curve = need_curve(src, "givental");
    const int q = q_max_of(cfg, src);
    auto [block_chi, block_q] = givental_block_caps(curve, cfg.chi_max, q);
    FTable transformed = givental_transform(curve, givental_blocks(curve, block_chi, block_q), cfg.chi_max, q);
    Engine e(src.spec);
    FTable direct = e.compute_all(cfg.chi_max, q);
    long checked = 0, bad = 0;
    json mismatches = compare_tables(direct, transformed, checked, bad);
    return finish(cfg, {{"suite", "givental"},
                        {"chi_max", cfg.chi_max},
                        {"q_max", q},
                        {"block_caps", {block_chi, block_q}},
                        {"checked", checked},
                        {"clean", bad == 0},
                        {"mismatch_count", bad},
                        {"mismatches", mismatches}});
}

int check_be_suite(const RunConfig& cfg) {
    Source src = resolve(cfg, true);
    const LocalCurve& curve = need_curve(src, "be-oracle");
    const int q = q_max_of(cfg, src);
    Engine e(src.spec);
    FTable direct = e.compute_all(cfg.chi_max, q);
    FTable residues;
    residues.chi_max = cfg.chi_max;
    residues.q_max = q;
    residues.support = direct.support;
    for (int g = 0; 2 * g - 1 <= cfg.chi_max; ++g)
        for (int n = 1; 2 * g - 2 + n <= cfg.chi_max; ++n) {
            if (2 * g - 2 + n <= 0) continue;
            for (const auto& [k, v] : be_recursion(curve, g, n, q).entries) residues.entries[k] = v;
        }
    long checked = 0, bad = 0;
    json mismatches = compare_tables(direct, residues, checked, bad);
    return finish(cfg, {{"suite", "be-oracle"},
                        {"chi_max", cfg.chi_max},
                        {"q_max", q},
                        {"checked", checked},
                        {"clean", bad == 0},
                        {"mismatch_count", bad},
                        {"mismatches", mismatches}});
}

int check_psi_suite(const RunConfig& cfg) {
    auto results = psi_identity_suite(cfg.r_max > 0 ? cfg.r_max : 6, 7);
    json families = json::array();
    bool clean = true;
    for (const auto& r : results) {
        clean = clean && r.failures.empty();
        json failures = json::array();
        for (size_t i = 0; i < r.failures.size() && i < 20; ++i) failures.push_back(r.failures[i]);
        families.push_back({{"name", r.name},
                            {"checked", r.checked},
                            {"failure_count", r.failures.size()},
                            {"failures", failures}});
    }
    return finish(cfg, {{"suite", "psi-identities"}, {"clean", clean}, {"families", families}});
}

int check_closed_suite(const RunConfig& cfg) {
    const int r_max = cfg.r_max > 0 ? cfg.r_max : 8;
    ClosedFormReport rep = check_closed_forms(r_max);
    json pairs = json::array();
    for (const auto& [r, s] : rep.pairs) pairs.push_back({r, s});
    json mismatches = json::array();
    for (size_t i = 0; i < rep.mismatches.size() && i < 20; ++i) {
        const auto& m = rep.mismatches[i];
        mismatches.push_back({{"rs", {m.r, m.s}},
                              {"entry", m.idx.size() == 1 ? "F11" : "F03"},
                              {"idx", m.idx},
                              {"engine", to_string(m.engine)},
                              {"closed", to_string(m.closed)}});
    }
    const long bad = static_cast<long>(rep.mismatches.size());
    if (bad > 0)
        std::cerr << "closed-forms: " << bad << " of " << rep.checked << " entries differ; the engine equals the negated "
                  << "closed form at " << rep.negated << " of them\n";
    return finish(cfg, {{"suite", "closed-forms"},
                        {"r_max", r_max},
                        {"pairs", pairs},
                        {"checked", rep.checked},
                        {"clean", bad == 0},
                        {"mismatch_count", bad},
                        {"negated_count", rep.negated},
                        {"mismatches", mismatches}});
}

int run_compute(const RunConfig& cfg) {
    if (cfg.format != "json" && cfg.format != "csv") fail("BadInput", "--format is json or csv");
    Source src = resolve(cfg, false);
    Engine e(src.spec);
    FTable t = e.compute_all(cfg.chi_max, q_max_of(cfg, src));
    emit(cfg, cfg.format == "json" ? table_to_json_text(t) : table_to_csv(t));
    return kExitClean;
}

void add_source_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--rs", cfg.rs, "Built-in (r,s) structure, as r,s");
    cmd->add_option("--cycle", cfg.cycle, "Crosscapped (r-1)-cycle structure, as r,s,q");
    cmd->add_option("--curve", cfg.curve_path, "Local spectral curve JSON file");
    cmd->add_option("--chi-max", cfg.chi_max, "Largest 2g-2+n")->check(CLI::PositiveNumber);
    cmd->add_option("--q-max", cfg.q_max, "Largest label level (default 2s)")->check(CLI::PositiveNumber);
    cmd->add_option("--out", cfg.out, "Output file (default stdout)");
    cmd->add_flag("--reduced", cfg.reduced, "Drop the W^1 operators");
    cmd->add_flag("--force", cfg.force, "Accept non-admissible parameters");
    cmd->add_flag("--crosscapped", cfg.crosscapped, "Enumerate half-integer genera");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Higher quantum Airy structures: exact F_{g,n} tables and identity checks"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* psi_cmd = app.add_subcommand("psi", "Evaluate a root-of-unity sum Psi^{(j)}(a)");
    int psi_r = 0, psi_j = 0;
    std::vector<long> psi_args;
    bool psi_use_brute = false;
    psi_cmd->add_option("--r", psi_r, "Order of the roots of unity")->required();
    psi_cmd->add_option("--j", psi_j, "Number of contracted pairs")->check(CLI::NonNegativeNumber);
    psi_cmd->add_option("--a", psi_args, "Arguments")->allow_extra_args();
    psi_cmd->add_flag("--brute", psi_use_brute, "Sum over the roots directly");

    auto* compute_cmd = app.add_subcommand("compute", "Compute all F_{g,n} up to the given caps");
    add_source_options(compute_cmd, cfg);
    compute_cmd->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    auto* check_cmd = app.add_subcommand("check", "Run a verification suite");
    std::string suite;
    check_cmd
        ->add_option("suite", suite, "symmetry|annihilate|loop-eq|givental|be-oracle|psi-identities|closed-forms")
        ->required()
        ->check(CLI::IsMember(
            {"symmetry", "annihilate", "loop-eq", "givental", "be-oracle", "psi-identities", "closed-forms"}));
    add_source_options(check_cmd, cfg);
    check_cmd->add_option("--probe", cfg.probe, "Largest probed label for annihilate (default q-max)")
        ->check(CLI::PositiveNumber);
    check_cmd->add_option("--r-max", cfg.r_max, "Largest r for psi-identities and closed-forms")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*psi_cmd) {
            Rat v = psi_use_brute ? psi_brute(psi_r, psi_j, psi_args) : psi(psi_r, psi_j, psi_args);
            std::cout << to_string(v) << "\n";
            return kExitClean;
        }
        if (*compute_cmd) return run_compute(cfg);
        if (suite == "symmetry") return check_symmetry_suite(cfg);
        if (suite == "annihilate") return check_annihilate_suite(cfg);
        if (suite == "loop-eq") return check_loop_suite(cfg);
        if (suite == "givental") return check_givental_suite(cfg);
        if (suite == "be-oracle") return check_be_suite(cfg);
        if (suite == "psi-identities") return check_psi_suite(cfg);
        return check_closed_suite(cfg);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "InternalError: " << e.what() << "\n";
    }
    return kExitUsage;
}
