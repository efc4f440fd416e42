#include "rprae/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "rprae/analysis.hpp"
#include "rprae/errors.hpp"

namespace rprae {

namespace {

double row_distance(const Tensor& a, int i, const Tensor& b, int j) {
    const int d = a.dim(1);
    const double* pa = a.data() + static_cast<size_t>(i) * d;
    const double* pb = b.data() + static_cast<size_t>(j) * d;
    double acc = 0;
    for (int k = 0; k < d; ++k) {
        const double diff = pa[k] - pb[k];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

}  // namespace

double dtw(const Tensor& a, const Tensor& b, bool normalize) {
    if (a.rank() != 2 || b.rank() != 2) throw ShapeError("dtw: sequences must be [T,d]");
    if (a.dim(1) != b.dim(1)) throw ShapeError("dtw: dimension mismatch");
    if (a.dim(0) < 1 || b.dim(0) < 1) throw ShapeError("dtw: empty sequence");

    const int Ta = a.dim(0), Tb = b.dim(0);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(static_cast<size_t>(Tb) + 1, inf);
    std::vector<double> cur(static_cast<size_t>(Tb) + 1, inf);
    prev[0] = 0.0;
    for (int i = 1; i <= Ta; ++i) {
        cur[0] = inf;
        for (int j = 1; j <= Tb; ++j) {
            const double best = std::min(prev[static_cast<size_t>(j)],
                                         std::min(cur[static_cast<size_t>(j) - 1],
                                                  prev[static_cast<size_t>(j) - 1]));
            cur[static_cast<size_t>(j)] = row_distance(a, i - 1, b, j - 1) + best;
        }
        std::swap(prev, cur);
    }
    const double cost = prev[static_cast<size_t>(Tb)];
    return normalize ? cost / static_cast<double>(Ta + Tb) : cost;
}

bool description_success(const std::vector<std::string>& tokens, const ActionSpec& spec,
                         const SynonymLexicon& lex) {
    if (tokens.size() != 4) return false;
    if (tokens[3] != lex.token_at(lex.eos_index())) return false;
    const auto want = expected_groups(spec);
    for (int slot = 0; slot < 3; ++slot) {
        if (!lex.contains(tokens[static_cast<size_t>(slot)])) return false;
        if (lex.group_of(tokens[static_cast<size_t>(slot)]) != want[static_cast<size_t>(slot)])
            return false;
    }
    return true;
}

bool speed_success(int T, Speed speed, int threshold) {
    if (T < 1) throw UsageError("speed_success: T must be positive");
    return speed == Speed::Fast ? T <= threshold : T > threshold;
}

bool task_success(const Tensor& joints, const ActionSpec& spec, const TaskThresholds& th) {
    if (joints.rank() != 2 || joints.dim(1) != 10 || joints.dim(0) < 1)
        throw ShapeError("task_success: joints must be [T,10]");
    const int T = joints.dim(0);
    const double* first = joints.data();
    const double* last = joints.data() + static_cast<size_t>(T - 1) * 10;

    // Arm displacement: sum of |net| over each arm's five joints.
    double disp[2] = {0, 0};
    for (int d = 0; d < 10; ++d) disp[d / 5] += std::fabs(last[d] - first[d]);
    const int acting = spec.hand == Hand::Left ? 0 : 1;
    if (disp[acting] <= disp[1 - acting]) return false;

    // Motion axis and required sign: reach axis for pull/push, lateral for
    // slide (left slides positive, right negative).
    int axis = acting * 5;
    double sign = 1.0;
    switch (spec.motion) {
        case Motion::Pull: axis += 1; sign = -1.0; break;
        case Motion::Push: axis += 1; sign = +1.0; break;
        case Motion::Slide: sign = spec.hand == Hand::Left ? 1.0 : -1.0; break;
    }
    const double net = (last[axis] - first[axis]) * sign;
    if (net < th.d_min) return false;

    return speed_success(T, spec.speed, th.speed_threshold);
}

Agg aggregate(const std::vector<double>& xs) {
    Agg a;
    a.n = static_cast<int>(xs.size());
    if (a.n == 0) return a;
    double sum = 0;
    for (double x : xs) sum += x;
    a.mean = sum / a.n;
    double ss = 0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.stdev = std::sqrt(ss / a.n);
    return a;
}

std::string pos_grouping(bool verb_unseen, bool adj_unseen, bool adv_unseen) {
    std::vector<const char*> parts;
    if (verb_unseen) parts.push_back("verb");
    if (adj_unseen) parts.push_back("adj");
    if (adv_unseen) parts.push_back("adv");
    if (parts.empty()) return "none";
    std::string out = parts[0];
    for (size_t i = 1; i < parts.size(); ++i) out += std::string("+") + parts[i];
    return out;
}

namespace {

using MetricBag = std::map<std::string, std::vector<double>>;

void push(MetricBag& bag, const std::string& key, double v) { bag[key].push_back(v); }

EvalReport finish(const std::string& mode, const MetricBag& bag) {
    EvalReport r;
    r.mode = mode;
    for (const auto& [key, xs] : bag) r.metrics[key] = aggregate(xs);
    return r;
}

}  // namespace

namespace {

using SampleRow = std::vector<std::pair<std::string, double>>;

SampleRow eval_sample(const ModelParams& m, const EmbeddingTable& table, const SynonymLexicon& lex,
                      const PairedDataset& data, const PairedSample& s, EvalMode mode,
                      const EvalConfig& cfg) {
    SampleRow row;
    const ActionSequence& gt = data.seq_of(s);
    const std::string cell = to_string(s.cell);

    if (mode == EvalMode::ActToDsc) {
        Tape tape;
        BoundModel bm = bind_model(tape, m, table, lex);
        const int z = encode_action(bm, gt);
        const DecodedDescription dec = decode_description(m, table, lex, tape.value(z), cfg.max_len);
        const double ok = description_success(dec.tokens, s.spec, lex) ? 100.0 : 0.0;
        const bool train_act = s.cell == Cell::TrainActTrainDsc || s.cell == Cell::TrainActUnseenDsc;
        row.emplace_back("success:all", ok);
        row.emplace_back(std::string("success:split:") + (train_act ? "train" : "test"), ok);
        row.emplace_back("success:cell:" + cell, ok);
        return row;
    }

    Tape tape;
    BoundModel bm = bind_model(tape, m, table, lex);
    const int z = encode_description(bm, s.description.tokens);
    const std::vector<double> rest(static_cast<size_t>(m.config().joint_dim), 0.0);
    const Tensor gen = decode_action(m, tape.value(z), rest, gt.visual, cfg.stop);

    const double cost = dtw(gen, gt.joints, cfg.normalize_dtw);
    const bool vu = s.word_set[0] == cfg.test_word_set;
    const bool au = s.word_set[1] == cfg.test_word_set;
    const bool du = s.word_set[2] == cfg.test_word_set;
    const int unseen = static_cast<int>(vu) + static_cast<int>(au) + static_cast<int>(du);
    const std::string pos = pos_grouping(vu, au, du);
    const double sp = speed_success(gen.dim(0), s.spec.speed, cfg.task.speed_threshold) ? 100.0 : 0.0;
    const double tk = task_success(gen, s.spec, cfg.task) ? 100.0 : 0.0;

    for (const std::string& suffix :
         {std::string("all"), "cell:" + cell, "unseen:" + std::to_string(unseen), "pos:" + pos}) {
        row.emplace_back("dtw:" + suffix, cost);
        row.emplace_back("speed:" + suffix, sp);
        row.emplace_back("task:" + suffix, tk);
    }
    return row;
}

}  // namespace

EvalReport evaluate(const ModelParams& m, const EmbeddingTable& table, const SynonymLexicon& lex,
                    const BuiltDataset& built, EvalMode mode, const EvalConfig& cfg) {
    if (built.data.samples.empty()) throw UsageError("evaluate: empty dataset");
    if (cfg.threads < 1) throw UsageError("evaluate: threads must be >= 1");

    // Samples are independent; workers fill per-sample rows and the merge
    // runs in sample order, so the report is identical for any thread count.
    const int n = static_cast<int>(built.data.samples.size());
    std::vector<SampleRow> rows(static_cast<size_t>(n));
    const int workers = std::min(cfg.threads, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            rows[static_cast<size_t>(i)] = eval_sample(m, table, lex, built.data,
                                                       built.data.samples[static_cast<size_t>(i)],
                                                       mode, cfg);
    } else {
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                        rows[static_cast<size_t>(i)] =
                            eval_sample(m, table, lex, built.data,
                                        built.data.samples[static_cast<size_t>(i)], mode, cfg);
                } catch (...) {
                    errors[static_cast<size_t>(w)] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    MetricBag bag;
    for (const SampleRow& row : rows)
        for (const auto& [key, v] : row) push(bag, key, v);
    return finish(mode == EvalMode::ActToDsc ? "act2dsc" : "dsc2act", bag);
}

void write_report_json(const EvalReport& report, const std::string& path) {
    nlohmann::json j;
    j["mode"] = report.mode;
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [key, a] : report.metrics)
        metrics[key] = {{"mean", a.mean}, {"stdev", a.stdev}, {"n", a.n}};
    j["metrics"] = metrics;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_report_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "key,mean,stdev,n\n";
    char buf[128];
    for (const auto& [key, a] : report.metrics) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%d", a.mean, a.stdev, a.n);
        out << key << "," << buf << "\n";
    }
}

Tensor retrofit_all(const ModelParams& m, const EmbeddingTable& table, const SynonymLexicon& lex) {
    const int V = lex.vocab_size();
    const int E = m.config().embed_dim;
    Tensor rows = Tensor::zeros({V, E});
    Tape tape;
    BoundModel bm = bind_model(tape, m, table, lex);
    for (int i = 0; i < V; ++i) {
        const int r = embed_token(bm, lex.token_at(i));
        const Tensor& v = tape.value(r);
        for (int d = 0; d < E; ++d) rows.data()[static_cast<size_t>(i) * E + d] = v[d];
    }
    return rows;
}

namespace {

// Mean of cosine-matrix entries over within-group pairs vs cross-group
// pairs; symbols sit outside every group and are excluded.
void group_cosine_stats(const Tensor& cos, const SynonymLexicon& lex, double& intra, double& inter) {
    const int V = lex.vocab_size();
    std::vector<int> grp(static_cast<size_t>(V));
    for (int i = 0; i < V; ++i) grp[static_cast<size_t>(i)] = lex.group_of(lex.token_at(i));
    double si = 0, sx = 0;
    int ni = 0, nx = 0;
    for (int i = 0; i < V; ++i) {
        if (grp[static_cast<size_t>(i)] < 0) continue;
        for (int j = i + 1; j < V; ++j) {
            if (grp[static_cast<size_t>(j)] < 0) continue;
            const double c = cos.data()[static_cast<size_t>(i) * V + j];
            if (grp[static_cast<size_t>(i)] == grp[static_cast<size_t>(j)]) {
                si += c;
                ++ni;
            } else {
                sx += c;
                ++nx;
            }
        }
    }
    intra = ni ? si / ni : 0.0;
    inter = nx ? sx / nx : 0.0;
}

double centroid_cosine(const EmbeddingTable& t, const SynonymGroup& a, const SynonymGroup& b) {
    const int d = t.dim();
    std::vector<double> ca(static_cast<size_t>(d), 0.0), cb(static_cast<size_t>(d), 0.0);
    for (const auto& w : a.members)
        for (int k = 0; k < d; ++k) ca[static_cast<size_t>(k)] += t.at(w)[static_cast<size_t>(k)];
    for (const auto& w : b.members)
        for (int k = 0; k < d; ++k) cb[static_cast<size_t>(k)] += t.at(w)[static_cast<size_t>(k)];
    double dot = 0, na = 0, nb = 0;
    for (int k = 0; k < d; ++k) {
        dot += ca[static_cast<size_t>(k)] * cb[static_cast<size_t>(k)];
        na += ca[static_cast<size_t>(k)] * ca[static_cast<size_t>(k)];
        nb += cb[static_cast<size_t>(k)] * cb[static_cast<size_t>(k)];
    }
    if (na == 0 || nb == 0) throw NumericError("zero centroid in antonym statistic");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

int adverb_group(const SynonymLexicon& lex, Speed s) {
    // Group order is fixed: slowly then fast.
    (void)lex;
    return s == Speed::Slowly ? 6 : 7;
}

}  // namespace

EmbeddingAnalysis analyze_embeddings(const ModelParams& m, const EmbeddingTable& table,
                                     const SynonymLexicon& lex) {
    EmbeddingAnalysis a;
    const auto& words = lex.vocab();

    EmbeddingTable retro(m.config().embed_dim);
    const Tensor rows = retrofit_all(m, table, lex);
    for (int i = 0; i < lex.vocab_size(); ++i) {
        std::vector<double> row(rows.data() + static_cast<size_t>(i) * rows.dim(1),
                                rows.data() + static_cast<size_t>(i + 1) * rows.dim(1));
        retro.add(words[static_cast<size_t>(i)], row);
    }

    a.cosine_input = cosine_matrix(table, words);
    a.cosine_retro = cosine_matrix(retro, words);
    a.pca_input = pca_project(table, words, 3).coords;
    a.pca_retro = pca_project(retro, words, 3).coords;
    group_cosine_stats(a.cosine_input, lex, a.intra_before, a.inter_before);
    group_cosine_stats(a.cosine_retro, lex, a.intra_after, a.inter_after);

    const SynonymGroup& slow = lex.group(adverb_group(lex, Speed::Slowly));
    const SynonymGroup& fast = lex.group(adverb_group(lex, Speed::Fast));
    a.antonym_before = centroid_cosine(table, slow, fast);
    a.antonym_after = centroid_cosine(retro, slow, fast);
    return a;
}

namespace {

nlohmann::json matrix_json(const Tensor& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < t.dim(0); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < t.dim(1); ++j)
            row.push_back(t.data()[static_cast<size_t>(i) * t.dim(1) + j]);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

void write_analysis_json(const EmbeddingAnalysis& a, const std::string& path) {
    nlohmann::json j;
    j["antonym_after"] = a.antonym_after;
    j["antonym_before"] = a.antonym_before;
    j["cosine_input"] = matrix_json(a.cosine_input);
    j["cosine_retro"] = matrix_json(a.cosine_retro);
    j["inter_after"] = a.inter_after;
    j["inter_before"] = a.inter_before;
    j["intra_after"] = a.intra_after;
    j["intra_before"] = a.intra_before;
    j["pca_input"] = matrix_json(a.pca_input);
    j["pca_retro"] = matrix_json(a.pca_retro);
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

std::string svg_heatmap(const Tensor& m, const std::vector<std::string>& labels) {
    if (m.rank() != 2 || m.dim(0) != m.dim(1)) throw ShapeError("svg_heatmap: need a square matrix");
    if (static_cast<int>(labels.size()) != m.dim(0))
        throw ShapeError("svg_heatmap: one label per row");
    const int n = m.dim(0), cell = 12, left = 80, top = 16;
    const int W = left + n * cell + 8, H = top + n * cell + 8;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) +
                    "\" height=\"" + std::to_string(H) + "\">\n";
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = std::max(-1.0, std::min(1.0, m.data()[static_cast<size_t>(i) * n + j]));
            int r = 255, g = 255, b = 255;
            if (v >= 0) {
                g = b = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            } else {
                r = g = static_cast<int>(std::lround(255.0 * (1.0 + v)));
            }
            s += "<rect x=\"" + std::to_string(left + j * cell) + "\" y=\"" +
                 std::to_string(top + i * cell) + "\" width=\"12\" height=\"12\" fill=\"rgb(" +
                 std::to_string(r) + "," + std::to_string(g) + "," + std::to_string(b) + ")\"/>\n";
        }
        s += "<text x=\"" + std::to_string(left - 4) + "\" y=\"" +
             std::to_string(top + i * cell + 10) + "\" font-size=\"9\" text-anchor=\"end\">" +
             labels[static_cast<size_t>(i)] + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string svg_scatter(const Tensor& coords, const std::vector<std::string>& labels, int cx, int cy) {
    if (coords.rank() != 2) throw ShapeError("svg_scatter: need [n,k] coordinates");
    if (cx < 0 || cy < 0 || cx >= coords.dim(1) || cy >= coords.dim(1))
        throw UsageError("svg_scatter: component out of range");
    if (static_cast<int>(labels.size()) != coords.dim(0))
        throw ShapeError("svg_scatter: one label per point");
    const int n = coords.dim(0), k = coords.dim(1);
    double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < 2; ++a) {
            const double v = coords.data()[static_cast<size_t>(i) * k + (a == 0 ? cx : cy)];
            lo[a] = std::min(lo[a], v);
            hi[a] = std::max(hi[a], v);
        }
    }
    for (int a = 0; a < 2; ++a)
        if (hi[a] - lo[a] < 1e-12) hi[a] = lo[a] + 1.0;
    const double size = 420.0, margin = 50.0;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"520\">\n";
    for (int i = 0; i < n; ++i) {
        const double x = coords.data()[static_cast<size_t>(i) * k + cx];
        const double y = coords.data()[static_cast<size_t>(i) * k + cy];
        const double px = margin + size * (x - lo[0]) / (hi[0] - lo[0]);
        const double py = margin + size * (1.0 - (y - lo[1]) / (hi[1] - lo[1]));
        s += "<circle cx=\"" + fmt(px) + "\" cy=\"" + fmt(py) + "\" r=\"3\" fill=\"#336\"/>\n";
        s += "<text x=\"" + fmt(px + 4) + "\" y=\"" + fmt(py - 3) + "\" font-size=\"8\">" +
             labels[static_cast<size_t>(i)] + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace rprae
