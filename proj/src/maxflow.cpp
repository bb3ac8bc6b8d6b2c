#include "blockctm/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "blockctm/error.hpp"

namespace blockctm::graphcut {

namespace {

void check_capacity(double cap) {
    if (!(cap >= 0.0) || !std::isfinite(cap)) {
        throw PreconditionError("flow capacities must be finite and nonnegative, got " +
                                std::to_string(cap));
    }
}

constexpr int kFree = -1;
constexpr int kTerminal = -2;
constexpr int kOrphan = -3;
constexpr int kInfiniteDist = std::numeric_limits<int>::max();

// Search-tree state follows Boykov & Kolmogorov (2004). `parent_[v]` is the
// arc from v towards its parent in either tree, or one of the sentinels:
// kTerminal (attached directly to its terminal), kOrphan, kFree.
class BkSolver {
public:
    explicit BkSolver(const FlowGraph& g)
        : g_(g),
          n_(g.node_count()),
          rcap_(g.arcs().size()),
          tr_(n_),
          parent_(n_, kFree),
          ts_(n_, 0),
          dist_(n_, 0),
          is_sink_(n_, 0),
          queued_(n_, 0) {
        for (std::size_t a = 0; a < rcap_.size(); ++a) rcap_[a] = g.arcs()[a].cap;
        for (int v = 0; v < n_; ++v) {
            const double cs = g.source_cap(v);
            const double ct = g.sink_cap(v);
            flow_ += std::min(cs, ct);
            tr_[v] = cs - ct;
            if (tr_[v] > 0.0) {
                attach_to_terminal(v, false);
            } else if (tr_[v] < 0.0) {
                attach_to_terminal(v, true);
            }
        }
    }

    FlowResult run() {
        int current = -1;
        for (;;) {
            int i = current;
            if (i != -1 && parent_[i] == kFree) i = -1;
            if (i == -1) {
                i = next_active();
                if (i == -1) break;
            }

            const int middle = grow(i);
            ++time_;
            if (middle != -1) {
                current = i;
                augment(middle);
                adopt_orphans();
            } else {
                current = -1;
            }
        }
        return {flow_, min_cut_side()};
    }

private:
    [[nodiscard]] int head(int a) const { return g_.arcs()[a].head; }
    [[nodiscard]] int next(int a) const { return g_.arcs()[a].next; }
    [[nodiscard]] int sister(int a) const { return g_.arcs()[a].sister; }
    [[nodiscard]] int first(int v) const { return g_.first_arc(v); }

    void attach_to_terminal(int v, bool sink) {
        is_sink_[v] = sink;
        parent_[v] = kTerminal;
        ts_[v] = time_;
        dist_[v] = 1;
        activate(v);
    }

    void activate(int v) {
        if (!queued_[v]) {
            queued_[v] = 1;
            active_.push_back(v);
        }
    }

    int next_active() {
        while (!active_.empty()) {
            const int v = active_.front();
            active_.pop_front();
            queued_[v] = 0;
            if (parent_[v] != kFree) return v;
        }
        return -1;
    }

    void make_orphan_front(int v) {
        parent_[v] = kOrphan;
        orphans_.push_front(v);
    }

    void make_orphan_back(int v) {
        parent_[v] = kOrphan;
        orphans_.push_back(v);
    }

    // Expands the tree containing i by one node layer. Returns the arc
    // joining the two trees, oriented source tree -> sink tree, or -1.
    int grow(int i) {
        if (!is_sink_[i]) {
            for (int a = first(i); a != -1; a = next(a)) {
                if (rcap_[a] <= 0.0) continue;
                const int j = head(a);
                if (parent_[j] == kFree) {
                    is_sink_[j] = 0;
                    parent_[j] = sister(a);
                    ts_[j] = ts_[i];
                    dist_[j] = dist_[i] + 1;
                    activate(j);
                } else if (is_sink_[j]) {
                    return a;
                } else if (ts_[j] <= ts_[i] && dist_[j] > dist_[i]) {
                    parent_[j] = sister(a);
                    ts_[j] = ts_[i];
                    dist_[j] = dist_[i] + 1;
                }
            }
        } else {
            for (int a = first(i); a != -1; a = next(a)) {
                const int back = sister(a);
                if (rcap_[back] <= 0.0) continue;
                const int j = head(a);
                if (parent_[j] == kFree) {
                    is_sink_[j] = 1;
                    parent_[j] = back;
                    ts_[j] = ts_[i];
                    dist_[j] = dist_[i] + 1;
                    activate(j);
                } else if (!is_sink_[j]) {
                    return back;
                } else if (ts_[j] <= ts_[i] && dist_[j] > dist_[i]) {
                    parent_[j] = back;
                    ts_[j] = ts_[i];
                    dist_[j] = dist_[i] + 1;
                }
            }
        }
        return -1;
    }

    void augment(int middle) {
        double bottleneck = rcap_[middle];

        int v = head(sister(middle));
        for (int a = parent_[v]; a != kTerminal; a = parent_[v]) {
            bottleneck = std::min(bottleneck, rcap_[sister(a)]);
            v = head(a);
        }
        bottleneck = std::min(bottleneck, tr_[v]);

        v = head(middle);
        for (int a = parent_[v]; a != kTerminal; a = parent_[v]) {
            bottleneck = std::min(bottleneck, rcap_[a]);
            v = head(a);
        }
        bottleneck = std::min(bottleneck, -tr_[v]);

        rcap_[sister(middle)] += bottleneck;
        rcap_[middle] -= bottleneck;

        v = head(sister(middle));
        for (int a = parent_[v]; a != kTerminal; a = parent_[v]) {
            rcap_[a] += bottleneck;
            rcap_[sister(a)] -= bottleneck;
            const int up = head(a);
            if (rcap_[sister(a)] == 0.0) make_orphan_front(v);
            v = up;
        }
        tr_[v] -= bottleneck;
        if (tr_[v] == 0.0) make_orphan_front(v);

        v = head(middle);
        for (int a = parent_[v]; a != kTerminal; a = parent_[v]) {
            rcap_[sister(a)] += bottleneck;
            rcap_[a] -= bottleneck;
            const int up = head(a);
            if (rcap_[a] == 0.0) make_orphan_front(v);
            v = up;
        }
        tr_[v] += bottleneck;
        if (tr_[v] == 0.0) make_orphan_front(v);

        flow_ += bottleneck;
    }

    // Distance from j to its terminal through valid parents, or
    // kInfiniteDist when the chain ends at an orphan. Caches along the way.
    int origin_distance(int j) {
        int d = 0;
        for (int k = j;;) {
            if (ts_[k] == time_) return d + dist_[k];
            const int a = parent_[k];
            ++d;
            if (a == kTerminal) {
                ts_[k] = time_;
                dist_[k] = 1;
                return d;
            }
            if (a == kOrphan) return kInfiniteDist;
            k = head(a);
        }
    }

    void mark_path(int j, int d) {
        for (int k = j; ts_[k] != time_; k = head(parent_[k])) {
            ts_[k] = time_;
            dist_[k] = d--;
        }
    }

    void process_orphan(int i) {
        const bool sink = is_sink_[i];
        int best = kFree;
        int best_dist = kInfiniteDist;

        for (int a0 = first(i); a0 != -1; a0 = next(a0)) {
            // Candidate parent j needs residual capacity along the tree's
            // flow direction: j -> i in the source tree, i -> j in the sink.
            const double residual = sink ? rcap_[a0] : rcap_[sister(a0)];
            if (residual <= 0.0) continue;
            const int j = head(a0);
            if (static_cast<bool>(is_sink_[j]) != sink || parent_[j] == kFree) continue;
            const int d = origin_distance(j);
            if (d == kInfiniteDist) continue;
            if (d < best_dist) {
                best = a0;
                best_dist = d;
            }
            mark_path(j, d);
        }

        parent_[i] = best;
        if (best != kFree) {
            ts_[i] = time_;
            dist_[i] = best_dist + 1;
            return;
        }

        for (int a0 = first(i); a0 != -1; a0 = next(a0)) {
            const int j = head(a0);
            if (static_cast<bool>(is_sink_[j]) != sink) continue;
            const int a = parent_[j];
            if (a == kFree) continue;
            const double residual = sink ? rcap_[a0] : rcap_[sister(a0)];
            if (residual > 0.0) activate(j);
            if (a != kTerminal && a != kOrphan && head(a) == i) make_orphan_back(j);
        }
    }

    void adopt_orphans() {
        while (!orphans_.empty()) {
            const int v = orphans_.front();
            orphans_.pop_front();
            process_orphan(v);
        }
    }

    std::vector<Side> min_cut_side() const {
        std::vector<Side> side(n_, Side::Sink);
        std::deque<int> queue;
        for (int v = 0; v < n_; ++v) {
            if (tr_[v] > 0.0) {
                side[v] = Side::Source;
                queue.push_back(v);
            }
        }
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int a = first(u); a != -1; a = next(a)) {
                const int w = head(a);
                if (rcap_[a] > 0.0 && side[w] == Side::Sink) {
                    side[w] = Side::Source;
                    queue.push_back(w);
                }
            }
        }
        return side;
    }

    const FlowGraph& g_;
    int n_;
    std::vector<double> rcap_;
    std::vector<double> tr_;
    std::vector<int> parent_;
    std::vector<int> ts_;
    std::vector<int> dist_;
    std::vector<std::uint8_t> is_sink_;
    std::vector<std::uint8_t> queued_;
    std::deque<int> active_;
    std::deque<int> orphans_;
    int time_ = 0;
    double flow_ = 0.0;
};

}  // namespace

FlowGraph::FlowGraph(int node_count) {
    if (node_count < 0) throw PreconditionError("node count must be nonnegative");
    first_.assign(node_count, -1);
    source_cap_.assign(node_count, 0.0);
    sink_cap_.assign(node_count, 0.0);
}

void FlowGraph::check_node(int node) const {
    if (node < 0 || node >= node_count()) {
        throw PreconditionError("node index " + std::to_string(node) + " out of range");
    }
}

void FlowGraph::add_edge(int from, int to, double cap, double rev_cap) {
    check_node(from);
    check_node(to);
    check_capacity(cap);
    check_capacity(rev_cap);
    if (from == to) throw PreconditionError("self-loop arcs are not allowed");
    const int a = static_cast<int>(arcs_.size());
    arcs_.push_back({to, first_[from], a + 1, cap});
    first_[from] = a;
    arcs_.push_back({from, first_[to], a, rev_cap});
    first_[to] = a + 1;
}

void FlowGraph::add_terminal(int node, double source_cap, double sink_cap) {
    check_node(node);
    check_capacity(source_cap);
    check_capacity(sink_cap);
    source_cap_[node] += source_cap;
    sink_cap_[node] += sink_cap;
}

double FlowGraph::cut_capacity(std::span<const Side> side) const {
    if (side.size() != first_.size()) throw PreconditionError("cut assignment size mismatch");
    double total = 0.0;
    for (std::size_t v = 0; v < side.size(); ++v) {
        total += side[v] == Side::Source ? sink_cap_[v] : source_cap_[v];
    }
    for (const Arc& arc : arcs_) {
        const int tail = arcs_[arc.sister].head;
        if (side[tail] == Side::Source && side[arc.head] == Side::Sink) total += arc.cap;
    }
    return total;
}

FlowResult max_flow_min_cut(const FlowGraph& graph) {
    return BkSolver(graph).run();
}

}  // namespace blockctm::graphcut
