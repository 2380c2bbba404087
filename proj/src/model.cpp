#include "cogbridge/model.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace cogbridge {

namespace {

Tensor2 grad_like(int rows, int cols) { return Tensor2(rows, cols); }

}  // namespace

std::vector<ParamRef> BridgeModel::params() {
    std::vector<ParamRef> out;
    if (cfg.use_attention) {
        out.push_back({"W_att", &W_att, &gW_att});
        out.push_back({"b_att", &b_att, &gb_att});
        out.push_back({"v_att", &v_att, &gv_att});
    }
    if (cfg.use_encoder) {
        out.push_back({"W_fwd", &W_fwd, &gW_fwd});
        out.push_back({"b_fwd", &b_fwd, &gb_fwd});
        out.push_back({"W_bwd", &W_bwd, &gW_bwd});
        out.push_back({"b_bwd", &b_bwd, &gb_bwd});
    }
    if (kind == TaskKind::Sequence) {
        out.push_back({"W_s", &W_s, &gW_s});
        out.push_back({"b_s", &b_s, &gb_s});
        out.push_back({"T", &T, &gT});
    } else {
        out.push_back({"W_p", &W_p, &gW_p});
        out.push_back({"b_p", &b_p, &gb_p});
    }
    return out;
}

BridgeModel make_model(const ModelConfig& cfg, TaskKind kind, int d, int n_max, int n_labels) {
    if (d < 1 || n_max < 1 || n_labels < 1)
        throw std::invalid_argument("make_model: non-positive dimension");
    BridgeModel m;
    m.cfg = cfg;
    m.kind = kind;
    m.d = d;
    m.n_max = n_max;
    m.n_labels = n_labels;

    auto alloc = [](Tensor2& value, Tensor2& grad, int r, int c) {
        value = Tensor2(r, c);
        value.requires_grad = true;
        grad = grad_like(r, c);
    };
    if (cfg.use_attention) {
        alloc(m.W_att, m.gW_att, d, n_max);
        alloc(m.b_att, m.gb_att, d, 1);
        alloc(m.v_att, m.gv_att, d, 1);
    }
    if (cfg.use_encoder) {
        const int h = cfg.hidden;
        alloc(m.W_fwd, m.gW_fwd, d + h, 4 * h);
        alloc(m.b_fwd, m.gb_fwd, 1, 4 * h);
        alloc(m.W_bwd, m.gW_bwd, d + h, 4 * h);
        alloc(m.b_bwd, m.gb_bwd, 1, 4 * h);
    }
    if (kind == TaskKind::Sequence) {
        alloc(m.W_s, m.gW_s, m.enc_out(), n_labels);
        alloc(m.b_s, m.gb_s, 1, n_labels);
        alloc(m.T, m.gT, n_labels + 1, n_labels);  // last row = START
    } else {
        alloc(m.W_p, m.gW_p, m.enc_out(), n_labels);
        alloc(m.b_p, m.gb_p, 1, n_labels);
    }
    return m;
}

namespace {

// One LSTM direction over the given row order; returns the hidden state
// node (1 x h) per step, indexed by position in `order`.
std::vector<Graph::NodeId> lstm_direction(Graph& g, Graph::NodeId h_att,
                                          const std::vector<int>& order, int hidden,
                                          Graph::NodeId w, Graph::NodeId b) {
    const int h = hidden;
    Graph::NodeId h_prev = g.input(Tensor2(1, h));
    Graph::NodeId c_prev = g.input(Tensor2(1, h));
    std::vector<Graph::NodeId> states(order.size());
    for (std::size_t step = 0; step < order.size(); ++step) {
        const int t = order[step];
        Graph::NodeId x_t = g.slice_rows(h_att, t, t + 1);
        Graph::NodeId z = g.concat_cols(x_t, h_prev);
        Graph::NodeId pre = g.add(g.matmul(z, w), b);
        Graph::NodeId i_g = g.sigmoid(g.slice_cols(pre, 0, h));
        Graph::NodeId f_g = g.sigmoid(g.slice_cols(pre, h, 2 * h));
        Graph::NodeId g_g = g.tanh(g.slice_cols(pre, 2 * h, 3 * h));
        Graph::NodeId o_g = g.sigmoid(g.slice_cols(pre, 3 * h, 4 * h));
        Graph::NodeId c = g.add(g.mul(f_g, c_prev), g.mul(i_g, g_g));
        Graph::NodeId h_t = g.mul(o_g, g.tanh(c));
        states[step] = h_t;
        h_prev = h_t;
        c_prev = c;
    }
    return states;
}

struct Skeleton {
    BuiltGraph bg;
    std::vector<Graph::NodeId> ids;  // parallel to params()
};

// Attention + encoder shared by every head.
BuiltGraph build_trunk(BridgeModel& m, const SignalMatrix& x) {
    if (x.H.rows != m.n_max || x.H.cols != m.d)
        throw std::invalid_argument("build_graph: input is " + x.H.shape_str() + ", model wants " +
                                    std::to_string(m.n_max) + "x" + std::to_string(m.d));
    if (x.n < 1 || x.n > m.n_max)
        throw std::invalid_argument("build_graph: true length " + std::to_string(x.n) +
                                    " outside 1.." + std::to_string(m.n_max));
    BuiltGraph bg;
    Graph& g = bg.g;
    std::vector<ParamRef> ps = m.params();
    bg.param_ids.reserve(ps.size());
    for (ParamRef& p : ps) bg.param_ids.push_back(g.param(*p.value));
    auto pid = [&](const std::string& name) {
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (ps[i].name == name) return bg.param_ids[i];
        throw std::logic_error("no parameter named " + name);
    };

    Graph::NodeId H = g.input(x.H);  // n_max x d
    Graph::NodeId h_att = H;
    if (m.cfg.use_attention) {
        Graph::NodeId scores = g.matmul(
            g.tanh(g.add_colvec(g.matmul(pid("W_att"), H), pid("b_att"))), pid("v_att"));  // d x 1
        bg.alpha = g.softmax_rows(g.transpose(scores));  // 1 x d
        h_att = g.mul_rowvec(H, bg.alpha);               // n_max x d, column j scaled
    }

    if (m.cfg.use_encoder) {
        std::vector<int> fwd_order(x.n), bwd_order(x.n);
        for (int t = 0; t < x.n; ++t) {
            fwd_order[t] = t;
            bwd_order[t] = x.n - 1 - t;
        }
        std::vector<Graph::NodeId> fwd =
            lstm_direction(g, h_att, fwd_order, m.cfg.hidden, pid("W_fwd"), pid("b_fwd"));
        std::vector<Graph::NodeId> bwd =
            lstm_direction(g, h_att, bwd_order, m.cfg.hidden, pid("W_bwd"), pid("b_bwd"));
        std::vector<Graph::NodeId> rows(x.n);
        for (int t = 0; t < x.n; ++t)
            rows[t] = g.concat_cols(fwd[t], bwd[x.n - 1 - t]);  // bwd state at position t
        bg.h_prime = x.n == 1 ? rows[0] : g.stack_rows(rows);
    } else {
        bg.h_prime = g.slice_rows(h_att, 0, x.n);
    }

    if (m.kind == TaskKind::Sequence) {
        bg.emissions = g.add_rowvec(g.matmul(bg.h_prime, pid("W_s")), pid("b_s"));  // n x K
    } else {
        Graph::NodeId pooled = g.max_over_rows(bg.h_prime);  // 1 x enc_out
        bg.probs = g.softmax_rows(g.add(g.matmul(pooled, pid("W_p")), pid("b_p")));
    }
    return bg;
}

}  // namespace

BuiltGraph build_graph(BridgeModel& m, const SignalMatrix& x) { return build_trunk(m, x); }

BuiltGraph build_loss_graph(BridgeModel& m, const SignalMatrix& x, int gold, double gamma,
                            double weight) {
    if (m.kind == TaskKind::Sequence)
        throw std::logic_error("build_loss_graph: sequence model wants build_crf_loss_graph");
    BuiltGraph bg = build_trunk(m, x);
    bg.loss = bg.g.focal_nll(bg.probs, gold, gamma, weight);
    return bg;
}

BuiltGraph build_crf_loss_graph(BridgeModel& m, const SignalMatrix& x,
                                const std::vector<int>& gold_tags) {
    if (m.kind != TaskKind::Sequence)
        throw std::logic_error("build_crf_loss_graph: model has no CRF head");
    if (static_cast<int>(gold_tags.size()) != x.n)
        throw std::invalid_argument("build_crf_loss_graph: " + std::to_string(gold_tags.size()) +
                                    " gold tags for a " + std::to_string(x.n) + "-token sentence");
    const int K = m.n_labels;
    for (int y : gold_tags)
        if (y < 0 || y >= K)
            throw std::invalid_argument("build_crf_loss_graph: tag id " + std::to_string(y) +
                                        " outside 0.." + std::to_string(K - 1));

    BuiltGraph bg = build_trunk(m, x);
    Graph& g = bg.g;
    Graph::NodeId t_node = -1;
    {
        std::vector<ParamRef> ps = m.params();
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (ps[i].name == "T") t_node = bg.param_ids[i];
    }

    // Forward algorithm: a_0 = T[START,:] + o_0; a_i = LSE_p(a_{i-1}[p] + T[p,:]) + o_i.
    Graph::NodeId t_body = x.n > 1 ? g.slice_rows(t_node, 0, K) : -1;
    Graph::NodeId a = g.add(g.slice_rows(t_node, K, K + 1), g.slice_rows(bg.emissions, 0, 1));
    for (int i = 1; i < x.n; ++i) {
        Graph::NodeId m_step = g.add_colvec(t_body, g.transpose(a));  // [p][y] = T[p][y] + a[p]
        a = g.add(g.logsumexp_rows(m_step), g.slice_rows(bg.emissions, i, i + 1));
    }
    Graph::NodeId log_z = g.logsumexp_rows(g.transpose(a));  // 1 x 1

    std::vector<std::pair<int, int>> t_picks, o_picks;
    t_picks.emplace_back(K, gold_tags[0]);  // START -> y_0
    for (int i = 1; i < x.n; ++i) t_picks.emplace_back(gold_tags[i - 1], gold_tags[i]);
    for (int i = 0; i < x.n; ++i) o_picks.emplace_back(i, gold_tags[i]);
    Graph::NodeId score =
        g.add(g.gather_sum(t_node, std::move(t_picks)), g.gather_sum(bg.emissions, std::move(o_picks)));
    bg.loss = g.add(log_z, g.scale(score, -1.0));
    return bg;
}

std::vector<int> viterbi(const Tensor2& emissions, const Tensor2& T) {
    const int n = emissions.rows;
    const int K = emissions.cols;
    if (T.rows != K + 1 || T.cols != K)
        throw std::invalid_argument("viterbi: transition matrix is " + T.shape_str() + ", want " +
                                    std::to_string(K + 1) + "x" + std::to_string(K));
    if (n == 0) return {};

    std::vector<std::vector<double>> best(n, std::vector<double>(K));
    std::vector<std::vector<int>> back(n, std::vector<int>(K, -1));
    for (int y = 0; y < K; ++y) best[0][y] = T.at(K, y) + emissions.at(0, y);
    for (int i = 1; i < n; ++i) {
        for (int y = 0; y < K; ++y) {
            int arg = 0;
            double mx = best[i - 1][0] + T.at(0, y);
            for (int p = 1; p < K; ++p) {
                const double s = best[i - 1][p] + T.at(p, y);
                if (s > mx) {  // strict: ties keep the lowest previous tag
                    mx = s;
                    arg = p;
                }
            }
            best[i][y] = mx + emissions.at(i, y);
            back[i][y] = arg;
        }
    }
    int last = 0;
    for (int y = 1; y < K; ++y)
        if (best[n - 1][y] > best[n - 1][last]) last = y;
    std::vector<int> tags(n);
    tags[n - 1] = last;
    for (int i = n - 1; i > 0; --i) tags[i - 1] = back[i][tags[i]];
    return tags;
}

std::vector<double> attention_alpha(BridgeModel& m, const SignalMatrix& x) {
    if (!m.cfg.use_attention)
        throw std::logic_error("attention_alpha: model built without the attention layer");
    BuiltGraph bg = build_graph(m, x);
    bg.g.forward();
    const Tensor2& a = bg.g.value(bg.alpha);
    return a.data;
}

int predict_label(BridgeModel& m, const SignalMatrix& x) {
    BuiltGraph bg = build_graph(m, x);
    bg.g.forward();
    const Tensor2& p = bg.g.value(bg.probs);
    int arg = 0;
    for (int j = 1; j < p.cols; ++j)
        if (p.data[j] > p.data[arg]) arg = j;
    return arg;
}

std::vector<int> predict_tags(BridgeModel& m, const SignalMatrix& x) {
    BuiltGraph bg = build_graph(m, x);
    bg.g.forward();
    return viterbi(bg.g.value(bg.emissions), m.T);
}

std::vector<double> focal_class_weights(const std::vector<int>& train_labels, int n_classes) {
    std::vector<double> counts(n_classes, 0.0);
    for (int y : train_labels) {
        if (y < 0 || y >= n_classes)
            throw std::invalid_argument("focal_class_weights: label " + std::to_string(y) +
                                        " outside 0.." + std::to_string(n_classes - 1));
        counts[y] += 1.0;
    }
    std::vector<double> w(n_classes);
    double total = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        w[c] = 1.0 / std::max(counts[c], 1.0);
        total += w[c];
    }
    const double mean = total / n_classes;
    for (double& x : w) x /= mean;
    return w;
}

void save_checkpoint(const std::string& path, const BridgeModel& m,
                     std::uint64_t norm_fingerprint) {
    nlohmann::json j;
    j["version"] = 1;
    j["config"] = {{"signal", signal_type_name(m.cfg.signal)},
                   {"task", m.cfg.task},
                   {"hidden", m.cfg.hidden},
                   {"use_attention", m.cfg.use_attention},
                   {"use_encoder", m.cfg.use_encoder},
                   {"focal", m.cfg.focal},
                   {"focal_gamma", m.cfg.focal_gamma},
                   {"seed", m.cfg.seed}};
    j["kind"] = static_cast<int>(m.kind);
    j["d"] = m.d;
    j["n_max"] = m.n_max;
    j["n_labels"] = m.n_labels;
    j["norm_fingerprint"] = std::to_string(norm_fingerprint);
    nlohmann::json params = nlohmann::json::object();
    for (ParamRef& p : const_cast<BridgeModel&>(m).params())
        params[p.name] = {{"rows", p.value->rows}, {"cols", p.value->cols}, {"data", p.value->data}};
    j["params"] = std::move(params);
    std::ofstream out(path);
    if (!out) throw InputError(path + ": cannot write");
    out << j.dump() << "\n";
}

std::pair<BridgeModel, std::uint64_t> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": invalid checkpoint JSON: " + e.what());
    }
    if (!j.is_object() || j.value("version", 0) != 1)
        throw InputError(path + ": unsupported checkpoint version");

    ModelConfig cfg;
    const nlohmann::json& c = j.at("config");
    cfg.signal = parse_signal_type(c.at("signal").get<std::string>());
    cfg.task = c.at("task").get<std::string>();
    cfg.hidden = c.at("hidden").get<int>();
    cfg.use_attention = c.at("use_attention").get<bool>();
    cfg.use_encoder = c.at("use_encoder").get<bool>();
    cfg.focal = c.at("focal").get<bool>();
    cfg.focal_gamma = c.at("focal_gamma").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();

    BridgeModel m = make_model(cfg, static_cast<TaskKind>(j.at("kind").get<int>()),
                               j.at("d").get<int>(), j.at("n_max").get<int>(),
                               j.at("n_labels").get<int>());
    for (ParamRef& p : m.params()) {
        const nlohmann::json& pj = j.at("params").at(p.name);
        if (pj.at("rows").get<int>() != p.value->rows || pj.at("cols").get<int>() != p.value->cols)
            throw InputError(path + ": parameter " + p.name + " has the wrong shape");
        std::vector<double> data = pj.at("data").get<std::vector<double>>();
        if (data.size() != p.value->size())
            throw InputError(path + ": parameter " + p.name + " has the wrong element count");
        p.value->data = std::move(data);
    }
    const std::uint64_t fp = std::stoull(j.at("norm_fingerprint").get<std::string>());
    return {std::move(m), fp};
}

}  // namespace cogbridge
