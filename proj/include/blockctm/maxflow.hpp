#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace blockctm::graphcut {

enum class Side : std::uint8_t { Source = 0, Sink = 1 };

/// Directed capacitated graph with implicit source and sink terminals.
/// Non-terminal nodes are 0..node_count()-1; terminal links are stored as
/// per-node capacities (source -> node, node -> sink).
class FlowGraph {
public:
    struct Arc {
        int head;
        int next;    // next arc leaving the same tail, -1 terminates
        int sister;  // reverse arc
        double cap;
    };

    explicit FlowGraph(int node_count);

    [[nodiscard]] int node_count() const noexcept { return static_cast<int>(first_.size()); }
    [[nodiscard]] std::size_t arc_count() const noexcept { return arcs_.size(); }

    /// Adds arc from->to with capacity `cap` and its reverse with `rev_cap`.
    /// Capacities must be finite and nonnegative.
    void add_edge(int from, int to, double cap, double rev_cap = 0.0);

    /// Accumulates capacity on source->node and node->sink.
    void add_terminal(int node, double source_cap, double sink_cap);

    [[nodiscard]] double source_cap(int node) const { return source_cap_[node]; }
    [[nodiscard]] double sink_cap(int node) const { return sink_cap_[node]; }
    [[nodiscard]] const std::vector<Arc>& arcs() const noexcept { return arcs_; }
    [[nodiscard]] int first_arc(int node) const { return first_[node]; }

    /// Sum of capacities of arcs crossing from the source side to the sink
    /// side, terminal links included.
    [[nodiscard]] double cut_capacity(std::span<const Side> side) const;

private:
    void check_node(int node) const;

    std::vector<int> first_;
    std::vector<Arc> arcs_;
    std::vector<double> source_cap_;
    std::vector<double> sink_cap_;
};

struct FlowResult {
    double flow_value = 0.0;
    /// Source side is the set reachable from the source in the final
    /// residual graph; every other node, including nodes reachable from
    /// neither terminal, is on the sink side.
    std::vector<Side> side;
};

/// Maximum flow / minimum cut by Boykov-Kolmogorov tree search. The result
/// is deterministic for a given graph (arcs are scanned in a fixed order).
[[nodiscard]] FlowResult max_flow_min_cut(const FlowGraph& graph);

}  // namespace blockctm::graphcut
