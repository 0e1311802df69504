#include "hqas/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <set>
#include <thread>

namespace hqas {

std::vector<Label> StructureSpec::labels_upto(int q_max) const {
    std::vector<Label> out;
    for (int c : components)
        for (int q = 1; q <= q_max; ++q)
            if (!is_variable || is_variable(Label{c, q})) out.push_back(Label{c, q});
    std::sort(out.begin(), out.end());
    return out;
}

unsigned worker_threads() {
    if (const char* env = std::getenv("HQAS_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void for_each_multiset(const std::vector<Label>& labels, int n,
                       const std::function<void(const std::vector<Label>&)>& fn) {
    std::vector<Label> cur;
    auto rec = [&](auto&& self, size_t start, int left) -> void {
        if (left == 0) {
            fn(cur);
            return;
        }
        for (size_t i = start; i < labels.size(); ++i) {
            cur.push_back(labels[i]);
            self(self, i, left - 1);
            cur.pop_back();
        }
    };
    rec(rec, 0, n);
}

namespace {

thread_local std::set<std::pair<const void*, FKey>> in_progress;

template <class Fn>
void parallel_for(size_t n, const Fn& fn) {
    unsigned threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(std::max<size_t>(n, 1)));
    if (threads <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!err) err = std::current_exception();
                    next.store(n);
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

std::string idx_string(const std::vector<Label>& idx) {
    std::string s = "[";
    for (size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + to_string(idx[i]);
    return s + "]";
}

}  // namespace

Engine::Engine(StructureSpec spec) : spec_(std::move(spec)) {}

const OperatorEntry& Engine::op(const Label& q) {
    {
        std::shared_lock lock(op_mutex_);
        auto it = ops_.find(q);
        if (it != ops_.end()) return *it->second;
    }
    std::optional<OperatorEntry> e;
    if (spec_.operator_for && (!spec_.is_variable || spec_.is_variable(q))) e = spec_.operator_for(q);
    if (!e) fail("UnknownLabel", "no operator at label " + to_string(q));
    std::unique_lock lock(op_mutex_);
    auto [it, inserted] = ops_.emplace(q, std::make_shared<OperatorEntry>(std::move(*e)));
    return *it->second;
}

void Engine::validate(HalfInt g, const std::vector<Label>& idx) const {
    if (g.doubled < 0) fail("Unstable", "negative genus");
    if (!g.is_integer() && !spec_.crosscapped)
        fail("HalfGenusOnIntegerStructure", "half-integer genus " + to_string(g) + " on " + spec_.name);
    if (g.doubled - 2 + static_cast<int>(idx.size()) <= 0) fail("Unstable", "2g-2+n must be positive");
    for (const auto& l : idx) {
        bool known = std::find(spec_.components.begin(), spec_.components.end(), l.first) != spec_.components.end();
        if (!known || l.second <= 0 || (spec_.is_variable && !spec_.is_variable(l)))
            fail("UnknownLabel", "label " + to_string(l) + " is not a variable of " + spec_.name);
    }
}

Rat Engine::compute_F(HalfInt g, std::vector<Label> idx) {
    validate(g, idx);
    std::sort(idx.begin(), idx.end());
    return value(g.doubled, idx);
}

Rat Engine::compute_F_at(HalfInt g, std::vector<Label> idx, size_t position) {
    validate(g, idx);
    if (position >= idx.size()) fail("UnknownLabel", "distinguished position out of range");
    return recurse(g.doubled, idx, position);
}

Rat Engine::value(int g2, const std::vector<Label>& idx) {
    for (const auto& l : idx)
        if (l.second <= 0 || (spec_.is_variable && !spec_.is_variable(l))) return Rat(0);
    if (spec_.support && spec_.support->excludes(g2, idx)) return Rat(0);
    FKey key{g2, idx};
    {
        std::shared_lock lock(memo_mutex_);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
    }
    auto marker = std::make_pair(static_cast<const void*>(this), key);
    if (!in_progress.insert(marker).second)
        fail("HeadCycle", "linear head recursion returns to F at 2g=" + std::to_string(g2) + " " + idx_string(idx));
    Rat v;
    try {
        v = recurse(g2, idx, 0);
    } catch (...) {
        in_progress.erase(marker);
        throw;
    }
    in_progress.erase(marker);
    std::unique_lock lock(memo_mutex_);
    memo_.emplace(std::move(key), v);
    return v;
}

Rat Engine::recurse(int g2, const std::vector<Label>& idx, size_t position) {
    if (spec_.support && spec_.support->excludes(g2, idx)) return Rat(0);
    const Label q = idx[position];
    std::vector<Label> beta;
    for (size_t i = 0; i < idx.size(); ++i)
        if (i != position) beta.push_back(idx[i]);
    const int chi = g2 - 2 + static_cast<int>(idx.size());

    const OperatorEntry& entry = op(q);
    EnumRequest req;
    req.pool = beta;
    req.hbar_cap = HalfInt{g2};
    req.degree_cap = chi + 1;
    if (spec_.support) {
        req.weights = spec_.support->weights;
        req.weighted_sum_cap = Rat(chi);
    }
    const int step = spec_.crosscapped ? 1 : 2;
    FLookup lookup = [&](int h2, const std::vector<Label>& block) { return value(h2, block); };

    Rat diag = 0, acc = 0;
    for (const auto& t : entry.family->enumerate(req)) {
        if (t.hbar.doubled == 0 && t.creators.empty() && t.annihilators.size() == 1 &&
            Label{t.annihilators[0].comp, t.annihilators[0].level} == q) {
            diag += t.coeff;
            continue;
        }
        acc += xi_contribution(t, g2, beta, lookup, step);
    }
    if (sgn(diag) == 0) fail("SingularHead", "operator " + entry.name + " has no J_q term at " + to_string(q));
    return -acc / diag;
}

FTable Engine::compute_all(int chi_max, int q_max) {
    FTable table;
    table.chi_max = chi_max;
    table.q_max = q_max;
    table.support = spec_.support;
    table.crosscapped = spec_.crosscapped;
    const auto labels = spec_.labels_upto(q_max);
    if (labels.empty()) return table;
    const int step = spec_.crosscapped ? 1 : 2;
    for (int chi = 1; chi <= chi_max; ++chi) {
        std::vector<FKey> targets;
        for (int g2 = 0; g2 - 2 + 1 <= chi; g2 += step) {
            int n = chi + 2 - g2;
            if (n < 1) continue;
            for_each_multiset(labels, n, [&](const std::vector<Label>& idx) {
                if (spec_.support && spec_.support->excludes(g2, idx)) return;
                targets.push_back(FKey{g2, idx});
            });
        }
        std::vector<Rat> values(targets.size());
        parallel_for(targets.size(), [&](size_t i) { values[i] = value(targets[i].g2, targets[i].idx); });
        for (size_t i = 0; i < targets.size(); ++i) table.set(targets[i].g2, targets[i].idx, values[i]);
    }
    return table;
}

std::vector<SymmetryViolation> Engine::check_symmetry(int chi_max, int q_max) {
    std::vector<SymmetryViolation> out;
    const auto labels = spec_.labels_upto(q_max);
    const int step = spec_.crosscapped ? 1 : 2;
    for (int chi = 1; chi <= chi_max; ++chi) {
        std::vector<FKey> targets;
        for (int g2 = 0; g2 - 1 <= chi; g2 += step) {
            int n = chi + 2 - g2;
            if (n < 2) continue;
            for_each_multiset(labels, n, [&](const std::vector<Label>& idx) {
                if (spec_.support && spec_.support->excludes(g2, idx)) return;
                if (idx.front() == idx.back()) return;
                targets.push_back(FKey{g2, idx});
            });
        }
        std::vector<std::optional<SymmetryViolation>> found(targets.size());
        parallel_for(targets.size(), [&](size_t i) {
            const auto& [g2, idx] = targets[i];
            SymmetryViolation v{g2, idx, {}};
            bool differ = false;
            for (size_t p = 0; p < idx.size(); ++p) {
                if (p > 0 && idx[p] == idx[p - 1]) continue;
                Rat x = p == 0 ? value(g2, idx) : recurse(g2, idx, p);
                if (!v.values.empty() && x != v.values.front().second) differ = true;
                v.values.emplace_back(idx[p], x);
            }
            if (differ) found[i] = std::move(v);
        });
        for (auto& f : found)
            if (f) out.push_back(std::move(*f));
    }
    return out;
}

std::vector<AnnihilationResidual> Engine::check_annihilation(const FTable& F, int chi_max, int q_max) {
    struct Probe {
        Label q;
        int g2;
        std::vector<Label> beta;
        int chi;
    };
    std::vector<Probe> probes;
    const auto labels = spec_.labels_upto(q_max);
    const int step = spec_.crosscapped ? 1 : 2;
    for (const auto& q : labels) {
        if (spec_.operator_for && !spec_.operator_for(q)) continue;
        for (int chi = 1; chi <= chi_max; ++chi)
            for (int g2 = 0; g2 - 1 <= chi; g2 += step) {
                int nb = chi + 1 - g2;
                if (nb < 0) continue;
                for_each_multiset(labels, nb, [&](const std::vector<Label>& beta) {
                    probes.push_back(Probe{q, g2, beta, chi});
                });
            }
    }
    std::vector<std::optional<AnnihilationResidual>> found(probes.size());
    parallel_for(probes.size(), [&](size_t i) {
        const auto& p = probes[i];
        const OperatorEntry& e = op(p.q);
        Rat res = apply_to_Z(*e.family, F, HalfInt{p.g2}, p.beta, INT_MAX);
        if (sgn(res) != 0) found[i] = AnnihilationResidual{e.name, p.q, p.g2, p.beta, p.chi, res};
    });
    std::vector<AnnihilationResidual> out;
    for (auto& f : found)
        if (f) out.push_back(std::move(*f));
    return out;
}

}  // namespace hqas
