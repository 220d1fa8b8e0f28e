#include "udfmi/maxflow.hpp"

#include <algorithm>
#include <limits>

namespace udfmi {

namespace {
constexpr int kInfiniteDist = std::numeric_limits<int>::max();
inline int sister(int a) { return a ^ 1; }
}  // namespace

MaxFlowGraph::MaxFlowGraph(int node_hint, int edge_hint) {
    nodes_.reserve(static_cast<std::size_t>(std::max(0, node_hint)));
    arcs_.reserve(2 * static_cast<std::size_t>(std::max(0, edge_hint)));
}

int MaxFlowGraph::add_nodes(int n) {
    const int first = static_cast<int>(nodes_.size());
    nodes_.resize(nodes_.size() + static_cast<std::size_t>(n));
    return first;
}

void MaxFlowGraph::add_tweights(int i, Cap to_source, Cap to_sink) {
    const Cap delta = nodes_[i].tr_cap;
    if (delta > 0) to_source += delta;
    else to_sink -= delta;
    flow_ += std::min(to_source, to_sink);
    nodes_[i].tr_cap = to_source - to_sink;
}

void MaxFlowGraph::add_edge(int i, int j, Cap cap, Cap rev_cap) {
    const int a = static_cast<int>(arcs_.size());
    arcs_.push_back({j, nodes_[i].first, cap});
    arcs_.push_back({i, nodes_[j].first, rev_cap});
    nodes_[i].first = a;
    nodes_[j].first = a + 1;
}

void MaxFlowGraph::set_active(int i) {
    if (!nodes_[i].active) {
        nodes_[i].active = true;
        active_.push_back(i);
    }
}

int MaxFlowGraph::next_active() {
    while (!active_.empty()) {
        const int i = active_.front();
        active_.pop_front();
        nodes_[i].active = false;
        if (nodes_[i].parent != kNone) return i;
    }
    return -1;
}

void MaxFlowGraph::set_orphan(int i, bool front) {
    nodes_[i].parent = kOrphan;
    if (front) orphans_.push_front(i);
    else orphans_.push_back(i);
}

void MaxFlowGraph::augment(int middle) {
    // middle: arc from a source-tree node to a sink-tree node
    Cap bottleneck = arcs_[middle].r_cap;
    int i = arcs_[sister(middle)].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) break;
        bottleneck = std::min(bottleneck, arcs_[sister(a)].r_cap);
        i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, nodes_[i].tr_cap);
    i = arcs_[middle].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) break;
        bottleneck = std::min(bottleneck, arcs_[a].r_cap);
        i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, -nodes_[i].tr_cap);

    arcs_[sister(middle)].r_cap += bottleneck;
    arcs_[middle].r_cap -= bottleneck;

    i = arcs_[sister(middle)].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) {
            nodes_[i].tr_cap -= bottleneck;
            if (nodes_[i].tr_cap == 0) set_orphan(i, true);
            break;
        }
        arcs_[a].r_cap += bottleneck;
        arcs_[sister(a)].r_cap -= bottleneck;
        if (arcs_[sister(a)].r_cap == 0) set_orphan(i, true);
        i = arcs_[a].head;
    }
    i = arcs_[middle].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) {
            nodes_[i].tr_cap += bottleneck;
            if (nodes_[i].tr_cap == 0) set_orphan(i, true);
            break;
        }
        arcs_[sister(a)].r_cap += bottleneck;
        arcs_[a].r_cap -= bottleneck;
        if (arcs_[a].r_cap == 0) set_orphan(i, true);
        i = arcs_[a].head;
    }
    flow_ += bottleneck;
}

void MaxFlowGraph::process_source_orphan(int i) {
    int best_arc = kNone;
    int best_dist = kInfiniteDist;
    for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
        if (arcs_[sister(a0)].r_cap == 0) continue;
        int j = arcs_[a0].head;
        if (nodes_[j].is_sink || nodes_[j].parent == kNone) continue;
        // walk to the root to check the origin of j
        int d = 0;
        for (;;) {
            if (nodes_[j].ts == time_) {
                d += nodes_[j].dist;
                break;
            }
            const int a = nodes_[j].parent;
            ++d;
            if (a == kTerminal) {
                nodes_[j].ts = time_;
                nodes_[j].dist = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfiniteDist;
                break;
            }
            j = arcs_[a].head;
        }
        if (d < kInfiniteDist) {
            if (d < best_dist) {
                best_arc = a0;
                best_dist = d;
            }
            for (j = arcs_[a0].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].ts = time_;
                nodes_[j].dist = d--;
            }
        }
    }
    nodes_[i].parent = best_arc;
    if (best_arc != kNone) {
        nodes_[i].ts = time_;
        nodes_[i].dist = best_dist + 1;
        return;
    }
    for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
        const int j = arcs_[a0].head;
        const int a = nodes_[j].parent;
        if (nodes_[j].is_sink || a == kNone) continue;
        if (arcs_[sister(a0)].r_cap) set_active(j);
        if (a != kTerminal && a != kOrphan && arcs_[a].head == i) set_orphan(j, false);
    }
}

void MaxFlowGraph::process_sink_orphan(int i) {
    int best_arc = kNone;
    int best_dist = kInfiniteDist;
    for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
        if (arcs_[a0].r_cap == 0) continue;
        int j = arcs_[a0].head;
        if (!nodes_[j].is_sink || nodes_[j].parent == kNone) continue;
        int d = 0;
        for (;;) {
            if (nodes_[j].ts == time_) {
                d += nodes_[j].dist;
                break;
            }
            const int a = nodes_[j].parent;
            ++d;
            if (a == kTerminal) {
                nodes_[j].ts = time_;
                nodes_[j].dist = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfiniteDist;
                break;
            }
            j = arcs_[a].head;
        }
        if (d < kInfiniteDist) {
            if (d < best_dist) {
                best_arc = a0;
                best_dist = d;
            }
            for (j = arcs_[a0].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].ts = time_;
                nodes_[j].dist = d--;
            }
        }
    }
    nodes_[i].parent = best_arc;
    if (best_arc != kNone) {
        nodes_[i].ts = time_;
        nodes_[i].dist = best_dist + 1;
        return;
    }
    for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
        const int j = arcs_[a0].head;
        const int a = nodes_[j].parent;
        if (!nodes_[j].is_sink || a == kNone) continue;
        if (arcs_[a0].r_cap) set_active(j);
        if (a != kTerminal && a != kOrphan && arcs_[a].head == i) set_orphan(j, false);
    }
}

MaxFlowGraph::Cap MaxFlowGraph::maxflow() {
    active_.clear();
    orphans_.clear();
    time_ = 0;
    for (int i = 0; i < node_count(); ++i) {
        Node& n = nodes_[i];
        n.active = false;
        n.ts = 0;
        if (n.tr_cap > 0) {
            n.is_sink = false;
            n.parent = kTerminal;
            n.dist = 1;
            set_active(i);
        } else if (n.tr_cap < 0) {
            n.is_sink = true;
            n.parent = kTerminal;
            n.dist = 1;
            set_active(i);
        } else {
            n.parent = kNone;
        }
    }

    int current = -1;
    for (;;) {
        int i = current;
        if (i < 0 || nodes_[i].parent == kNone) {
            i = next_active();
            if (i < 0) break;
        }
        current = -1;

        int middle = kNone;
        if (!nodes_[i].is_sink) {
            for (int a = nodes_[i].first; a >= 0; a = arcs_[a].next) {
                if (arcs_[a].r_cap == 0) continue;
                const int j = arcs_[a].head;
                if (nodes_[j].parent == kNone) {
                    nodes_[j].is_sink = false;
                    nodes_[j].parent = sister(a);
                    nodes_[j].ts = nodes_[i].ts;
                    nodes_[j].dist = nodes_[i].dist + 1;
                    set_active(j);
                } else if (nodes_[j].is_sink) {
                    middle = a;
                    break;
                } else if (nodes_[j].ts <= nodes_[i].ts && nodes_[j].dist > nodes_[i].dist) {
                    nodes_[j].parent = sister(a);
                    nodes_[j].ts = nodes_[i].ts;
                    nodes_[j].dist = nodes_[i].dist + 1;
                }
            }
        } else {
            for (int a = nodes_[i].first; a >= 0; a = arcs_[a].next) {
                if (arcs_[sister(a)].r_cap == 0) continue;
                const int j = arcs_[a].head;
                if (nodes_[j].parent == kNone) {
                    nodes_[j].is_sink = true;
                    nodes_[j].parent = sister(a);
                    nodes_[j].ts = nodes_[i].ts;
                    nodes_[j].dist = nodes_[i].dist + 1;
                    set_active(j);
                } else if (!nodes_[j].is_sink) {
                    middle = sister(a);
                    break;
                } else if (nodes_[j].ts <= nodes_[i].ts && nodes_[j].dist > nodes_[i].dist) {
                    nodes_[j].parent = sister(a);
                    nodes_[j].ts = nodes_[i].ts;
                    nodes_[j].dist = nodes_[i].dist + 1;
                }
            }
        }

        ++time_;
        if (middle == kNone) continue;

        current = i;
        augment(middle);
        while (!orphans_.empty()) {
            const int o = orphans_.front();
            orphans_.pop_front();
            if (nodes_[o].is_sink) process_sink_orphan(o);
            else process_source_orphan(o);
        }
    }
    return flow_;
}

MaxFlowGraph::Segment MaxFlowGraph::what_segment(int i) const {
    const Node& n = nodes_[i];
    if (n.parent != kNone) return n.is_sink ? Segment::Sink : Segment::Source;
    return Segment::Source;
}

}  // namespace udfmi
