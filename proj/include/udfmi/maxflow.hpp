#pragma once

#include <cstdint>
#include <deque>
#include <vector>

namespace udfmi {

/// s-t min-cut on a sparse graph using the Boykov-Kolmogorov search-tree
/// augmenting path method. Capacities are integral.
class MaxFlowGraph {
public:
    using Cap = std::int64_t;
    enum class Segment { Source, Sink };

    MaxFlowGraph() = default;
    MaxFlowGraph(int node_hint, int edge_hint);

    int add_nodes(int n);
    /// Adds terminal capacities; may be called repeatedly for one node.
    void add_tweights(int i, Cap to_source, Cap to_sink);
    /// Directed capacities i->j = cap, j->i = rev_cap.
    void add_edge(int i, int j, Cap cap, Cap rev_cap);

    Cap maxflow();
    /// Side of the minimum cut; nodes unreachable from either terminal report Source.
    Segment what_segment(int i) const;

    int node_count() const { return static_cast<int>(nodes_.size()); }

private:
    static constexpr int kNone = -1;
    static constexpr int kTerminal = -2;
    static constexpr int kOrphan = -3;

    struct Node {
        int first = -1;
        int parent = kNone;
        int ts = 0;
        int dist = 0;
        Cap tr_cap = 0;
        bool is_sink = false;
        bool active = false;
    };
    struct Arc {
        int head;
        int next;
        Cap r_cap;
    };

    void set_active(int i);
    int next_active();
    void set_orphan(int i, bool front);
    void augment(int middle);
    void process_source_orphan(int i);
    void process_sink_orphan(int i);

    std::vector<Node> nodes_;
    std::vector<Arc> arcs_;
    std::deque<int> active_;
    std::deque<int> orphans_;
    Cap flow_ = 0;
    int time_ = 0;
};

}  // namespace udfmi
