#include "gigamae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace gigamae {

MetricStat summarize(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("summarize: no values");
    MetricStat s;
    s.values = values;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    double var = 0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / double(values.size()));
    return s;
}

// ---- multinomial logistic regression ----

namespace {

struct SoftmaxFit {
    MatD w;  // d x k
    MatD b;  // 1 x k
};

// mean cross-entropy + (l2/2)||W||^2; gradient written into gw/gb when given
double softmax_objective(const MatD& x, const std::vector<int>& y, const std::vector<int>& idx,
                         const MatD& w, const MatD& b, double l2, MatD* gw, MatD* gb) {
    int d = x.cols, k = w.cols;
    int n = int(idx.size());
    if (gw) {
        *gw = MatD(d, k);
        *gb = MatD(1, k);
    }
    double loss = 0;
    std::vector<double> logits(k);
    for (int r = 0; r < n; ++r) {
        int i = idx[r];
        for (int c = 0; c < k; ++c) {
            double acc = b(0, c);
            for (int j = 0; j < d; ++j) acc += x(i, j) * w(j, c);
            logits[c] = acc;
        }
        double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0;
        for (int c = 0; c < k; ++c) z += std::exp(logits[c] - mx);
        loss += -(logits[y[i]] - mx - std::log(z));
        if (gw) {
            for (int c = 0; c < k; ++c) {
                double p = std::exp(logits[c] - mx) / z - (c == y[i] ? 1.0 : 0.0);
                (*gb)(0, c) += p / n;
                for (int j = 0; j < d; ++j) (*gw)(j, c) += p * x(i, j) / n;
            }
        }
    }
    loss /= n;
    double reg = 0;
    for (double v : w.d) reg += v * v;
    loss += 0.5 * l2 * reg;
    if (gw)
        for (size_t e = 0; e < w.d.size(); ++e) gw->d[e] += l2 * w.d[e];
    return loss;
}

SoftmaxFit fit_softmax(const MatD& x, const std::vector<int>& y, const std::vector<int>& idx,
                       int num_classes, double l2, int max_iters, double grad_tol) {
    SoftmaxFit fit{MatD(x.cols, num_classes), MatD(1, num_classes)};
    double step = 1.0;
    MatD gw, gb;
    double f = softmax_objective(x, y, idx, fit.w, fit.b, l2, &gw, &gb);
    for (int it = 0; it < max_iters; ++it) {
        double gnorm2 = 0;
        for (double v : gw.d) gnorm2 += v * v;
        for (double v : gb.d) gnorm2 += v * v;
        if (std::sqrt(gnorm2) < grad_tol) break;

        // Armijo backtracking along the negative gradient
        step = std::min(step * 2.0, 1e6);
        MatD w2, b2;
        double f2 = 0;
        while (true) {
            w2 = fit.w;
            b2 = fit.b;
            for (size_t e = 0; e < w2.d.size(); ++e) w2.d[e] -= step * gw.d[e];
            for (size_t e = 0; e < b2.d.size(); ++e) b2.d[e] -= step * gb.d[e];
            f2 = softmax_objective(x, y, idx, w2, b2, l2, nullptr, nullptr);
            if (f2 <= f - 1e-4 * step * gnorm2 || step < 1e-14) break;
            step *= 0.5;
        }
        if (step < 1e-14) break;
        fit.w = std::move(w2);
        fit.b = std::move(b2);
        f = softmax_objective(x, y, idx, fit.w, fit.b, l2, &gw, &gb);
        (void)f2;
    }
    return fit;
}

double accuracy_of(const SoftmaxFit& fit, const MatD& x, const std::vector<int>& y,
                   const std::vector<int>& idx) {
    int hits = 0;
    for (int i : idx) {
        int best = 0;
        double bv = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < fit.w.cols; ++c) {
            double acc = fit.b(0, c);
            for (int j = 0; j < x.cols; ++j) acc += x(i, j) * fit.w(j, c);
            if (acc > bv) {
                bv = acc;
                best = c;
            }
        }
        hits += best == y[i];
    }
    return idx.empty() ? 0.0 : double(hits) / double(idx.size());
}

bool all_classes_present(const std::vector<int>& y, const std::vector<int>& idx, int num_classes) {
    std::vector<char> seen(num_classes, 0);
    for (int i : idx) seen[y[i]] = 1;
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

}  // namespace

double probe_accuracy(const MatD& emb, const std::vector<int>& labels, int num_classes,
                      const std::vector<int>& train_idx, const std::vector<int>& test_idx,
                      double l2, int max_iters, double grad_tol) {
    auto fit = fit_softmax(emb, labels, train_idx, num_classes, l2, max_iters, grad_tol);
    return accuracy_of(fit, emb, labels, test_idx);
}

ClassifyReport linear_probe(const MatD& emb, const std::vector<int>& labels, int num_classes,
                            const LinearProbeConfig& cfg) {
    if (emb.rows != int(labels.size()))
        throw std::invalid_argument("linear_probe: label count does not match embedding rows");
    if (num_classes < 2) throw std::invalid_argument("linear_probe: need at least 2 classes");
    for (int y : labels)
        if (y < 0 || y >= num_classes) throw std::invalid_argument("linear_probe: label out of range");
    if (cfg.train_frac <= 0 || cfg.valid_frac < 0 || cfg.train_frac + cfg.valid_frac >= 1)
        throw std::invalid_argument("linear_probe: invalid split fractions");
    if (cfg.l2_grid.empty()) throw std::invalid_argument("linear_probe: empty l2 grid");

    int n = emb.rows;
    int n_train = std::max(1, int(std::floor(cfg.train_frac * n)));
    int n_valid = int(std::floor(cfg.valid_frac * n));

    ClassifyReport rep;
    std::vector<double> accs;
    for (int r = 0; r < cfg.repeats; ++r) {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        uint64_t split_seed = 0;
        std::vector<int> train, valid, test;
        bool ok = false;
        // resample when the training slice misses a class
        for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
            split_seed = mix_seed(cfg.seed, 0x9000 + uint64_t(r) * 64 + attempt);
            std::mt19937_64 rng(split_seed);
            std::shuffle(perm.begin(), perm.end(), rng);
            train.assign(perm.begin(), perm.begin() + n_train);
            valid.assign(perm.begin() + n_train, perm.begin() + n_train + n_valid);
            test.assign(perm.begin() + n_train + n_valid, perm.end());
            ok = all_classes_present(labels, train, num_classes);
        }
        if (!ok)
            throw std::runtime_error(
                "linear_probe: could not draw a training split covering every class");

        double best_l2 = cfg.l2_grid.front();
        if (cfg.l2_grid.size() > 1 && !valid.empty()) {
            double best_acc = -1;
            for (double l2 : cfg.l2_grid) {
                auto fit = fit_softmax(emb, labels, train, num_classes, l2, cfg.max_iters,
                                       cfg.grad_tol);
                double acc = accuracy_of(fit, emb, labels, valid);
                if (acc > best_acc) {
                    best_acc = acc;
                    best_l2 = l2;
                }
            }
        }
        auto fit = fit_softmax(emb, labels, train, num_classes, best_l2, cfg.max_iters,
                               cfg.grad_tol);
        accs.push_back(accuracy_of(fit, emb, labels, test));
        rep.split_seeds.push_back(split_seed);
        rep.chosen_l2.push_back(best_l2);
    }
    rep.accuracy = summarize(accs);
    rep.split_desc = std::to_string(int(cfg.train_frac * 100)) + "/" +
                     std::to_string(int(cfg.valid_frac * 100)) + "/" +
                     std::to_string(100 - int(cfg.train_frac * 100) - int(cfg.valid_frac * 100)) +
                     " random split x" + std::to_string(cfg.repeats);
    return rep;
}

// ---- clustering ----

namespace {

double sqdist_row(const MatD& x, int i, const MatD& c, int j) {
    double acc = 0;
    for (int k = 0; k < x.cols; ++k) {
        double d = x(i, k) - c(j, k);
        acc += d * d;
    }
    return acc;
}

}  // namespace

KmeansResult kmeans_cluster(const MatD& x, int k, uint64_t seed, int max_iters) {
    if (k < 1 || k > x.rows) throw std::invalid_argument("kmeans: k out of range");
    int n = x.rows, d = x.cols;
    std::mt19937_64 rng(mix_seed(seed, 0x4b));

    // k-means++ seeding
    MatD centers(k, d);
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    {
        std::uniform_int_distribution<int> u(0, n - 1);
        int first = u(rng);
        for (int j = 0; j < d; ++j) centers(0, j) = x(first, j);
        for (int c = 1; c < k; ++c) {
            double total = 0;
            for (int i = 0; i < n; ++i) {
                dist2[i] = std::min(dist2[i], sqdist_row(x, i, centers, c - 1));
                total += dist2[i];
            }
            int pick = 0;
            if (total > 0) {
                std::uniform_real_distribution<double> ur(0.0, total);
                double r = ur(rng), acc = 0;
                for (int i = 0; i < n; ++i) {
                    acc += dist2[i];
                    if (acc >= r) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = u(rng);
            }
            for (int j = 0; j < d; ++j) centers(c, j) = x(pick, j);
        }
    }

    KmeansResult res;
    res.assign.assign(n, 0);
    std::vector<int> counts(k);
    for (int it = 0; it < max_iters; ++it) {
        bool changed = false;
        res.inertia = 0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bv = sqdist_row(x, i, centers, 0);
            for (int c = 1; c < k; ++c) {
                double v = sqdist_row(x, i, centers, c);
                if (v < bv) {
                    bv = v;
                    best = c;
                }
            }
            if (res.assign[i] != best) {
                res.assign[i] = best;
                changed = true;
            }
            res.inertia += bv;
        }
        res.iters = it + 1;

        centers = MatD(k, d);
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            ++counts[res.assign[i]];
            for (int j = 0; j < d; ++j) centers(res.assign[i], j) += x(i, j);
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (int j = 0; j < d; ++j) centers(c, j) /= counts[c];
            } else {
                // reseed from the point farthest from its current center
                int far = 0;
                double fv = -1;
                for (int i = 0; i < n; ++i) {
                    double v = sqdist_row(x, i, centers, res.assign[i]);
                    if (v > fv) {
                        fv = v;
                        far = i;
                    }
                }
                for (int j = 0; j < d; ++j) centers(c, j) = x(far, j);
                changed = true;
            }
        }
        if (!changed && it > 0) break;
    }
    res.centers = std::move(centers);
    return res;
}

namespace {

// contingency table plus marginal counts for two labelings
struct Contingency {
    std::map<std::pair<int, int>, long long> cells;
    std::map<int, long long> ra, rb;
    long long n = 0;
};

Contingency contingency(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("cluster metric: labelings must be same nonzero length");
    Contingency t;
    t.n = (long long)a.size();
    for (size_t i = 0; i < a.size(); ++i) {
        ++t.cells[{a[i], b[i]}];
        ++t.ra[a[i]];
        ++t.rb[b[i]];
    }
    return t;
}

double entropy_counts(const std::map<int, long long>& counts, long long n) {
    double h = 0;
    for (auto& [k, c] : counts) {
        double p = double(c) / n;
        if (p > 0) h -= p * std::log(p);
    }
    return h;
}

}  // namespace

double nmi_score(const std::vector<int>& a, const std::vector<int>& b) {
    auto t = contingency(a, b);
    double ha = entropy_counts(t.ra, t.n), hb = entropy_counts(t.rb, t.n);
    if (ha == 0 || hb == 0) return 0.0;
    double mi = 0;
    for (auto& [cell, c] : t.cells) {
        double pij = double(c) / t.n;
        double pi = double(t.ra.at(cell.first)) / t.n;
        double pj = double(t.rb.at(cell.second)) / t.n;
        mi += pij * std::log(pij / (pi * pj));
    }
    return mi / std::sqrt(ha * hb);
}

double ari_score(const std::vector<int>& a, const std::vector<int>& b) {
    auto t = contingency(a, b);
    auto comb2 = [](long long m) { return double(m) * double(m - 1) / 2.0; };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (auto& [cell, c] : t.cells) sum_ij += comb2(c);
    for (auto& [k, c] : t.ra) sum_a += comb2(c);
    for (auto& [k, c] : t.rb) sum_b += comb2(c);
    double total = comb2(t.n);
    double expected = sum_a * sum_b / total;
    double max_idx = 0.5 * (sum_a + sum_b);
    if (max_idx == expected) return sum_ij == expected ? 1.0 : 0.0;
    return (sum_ij - expected) / (max_idx - expected);
}

ClusterReport cluster_eval(const MatD& emb, const std::vector<int>& labels, int k, int repeats,
                           uint64_t seed) {
    if (emb.rows != int(labels.size()))
        throw std::invalid_argument("cluster_eval: label count does not match embedding rows");
    if (repeats < 1) throw std::invalid_argument("cluster_eval: repeats must be >= 1");
    ClusterReport rep;
    std::vector<double> nmis, aris;
    for (int r = 0; r < repeats; ++r) {
        uint64_t s = mix_seed(seed, 0xc000 + uint64_t(r));
        auto km = kmeans_cluster(emb, k, s);
        nmis.push_back(nmi_score(km.assign, labels));
        aris.push_back(ari_score(km.assign, labels));
        rep.seeds.push_back(s);
    }
    rep.nmi = summarize(nmis);
    rep.ari = summarize(aris);
    return rep;
}

// ---- link prediction ----

double auc_score(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("auc_score: need both positive and negative scores");
    // rank-based: sort all scores, sum positive ranks with midrank ties
    std::vector<std::pair<double, int>> all;
    all.reserve(pos.size() + neg.size());
    for (double v : pos) all.push_back({v, 1});
    for (double v : neg) all.push_back({v, 0});
    std::sort(all.begin(), all.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    double rank_sum = 0;
    size_t i = 0;
    while (i < all.size()) {
        size_t j = i;
        while (j < all.size() && all[j].first == all[i].first) ++j;
        double midrank = 0.5 * double(i + 1 + j);  // average of ranks i+1..j
        for (size_t t = i; t < j; ++t)
            if (all[t].second) rank_sum += midrank;
        i = j;
    }
    double np = double(pos.size()), nn = double(neg.size());
    return (rank_sum - np * (np + 1) / 2.0) / (np * nn);
}

double ap_score(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("ap_score: need both positive and negative scores");
    std::vector<std::pair<double, int>> all;
    for (double v : pos) all.push_back({v, 1});
    for (double v : neg) all.push_back({v, 0});
    // descending by score; positives first within ties for a deterministic order
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second > y.second;
    });
    double ap = 0;
    int tp = 0;
    for (size_t r = 0; r < all.size(); ++r) {
        if (all[r].second) {
            ++tp;
            ap += double(tp) / double(r + 1);
        }
    }
    return ap / double(pos.size());
}

LinkReport link_eval(const MatD& emb, const std::vector<Edge>& pos, const std::vector<Edge>& neg) {
    auto score = [&](const std::vector<Edge>& edges) {
        std::vector<double> out;
        out.reserve(edges.size());
        for (auto [u, v] : edges) {
            if (u < 0 || v < 0 || u >= emb.rows || v >= emb.rows)
                throw std::invalid_argument("link_eval: edge endpoint out of range");
            double acc = 0;
            for (int j = 0; j < emb.cols; ++j) acc += emb(u, j) * emb(v, j);
            out.push_back(acc);
        }
        return out;
    };
    LinkReport rep;
    auto ps = score(pos), ns = score(neg);
    rep.auc = auc_score(ps, ns);
    rep.ap = ap_score(ps, ns);
    return rep;
}

// ---- naive integration baselines ----

Integration parse_integration(const std::string& name) {
    if (name == "concat") return Integration::Concat;
    if (name == "avg") return Integration::Avg;
    if (name == "max") return Integration::Max;
    throw std::invalid_argument("unknown integration mode: " + name);
}

MatD naive_integration(const std::vector<MatD>& embs, Integration mode) {
    if (embs.empty()) throw std::invalid_argument("naive_integration: no inputs");
    int n = embs[0].rows;
    for (const auto& e : embs)
        if (e.rows != n) throw std::invalid_argument("naive_integration: row count mismatch");

    if (mode == Integration::Concat) {
        int total = 0;
        for (const auto& e : embs) total += e.cols;
        MatD out(n, total);
        int off = 0;
        for (const auto& e : embs) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < e.cols; ++j) out(i, off + j) = e(i, j);
            off += e.cols;
        }
        return out;
    }

    int width = 0;
    for (const auto& e : embs) width = std::max(width, e.cols);
    MatD out(n, width, mode == Integration::Max ? -std::numeric_limits<double>::infinity() : 0.0);
    for (const auto& e : embs) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < width; ++j) {
                double v = j < e.cols ? e(i, j) : 0.0;  // zero-pad narrower inputs
                if (mode == Integration::Max)
                    out(i, j) = std::max(out(i, j), v);
                else
                    out(i, j) += v / double(embs.size());
            }
    }
    return out;
}

}  // namespace gigamae
