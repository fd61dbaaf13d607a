#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qfl/vqc.hpp"

namespace qfl::netmodel {

enum class NodeRole { Client, Aggregator };

struct NodeSpec {
  int node_id = 0;
  int qubit_capacity = 1;
  NodeRole role = NodeRole::Client;
};

enum class TopologyKind { Star, Ring, Arbitrary };

// Undirected edge, stored with a <= b.
struct Edge {
  int a = 0;
  int b = 0;

  Edge() = default;
  Edge(int x, int y) : a(x < y ? x : y), b(x < y ? y : x) {}
  bool operator==(const Edge&) const = default;
};

// Graph of QPU nodes joined by classical links. Clients occupy node ids
// 0..k-1 in list order; a star adds the aggregator as node id k.
struct NetworkTopology {
  TopologyKind kind = TopologyKind::Arbitrary;
  std::vector<NodeSpec> nodes;
  std::vector<Edge> edges;

  std::vector<int> client_ids() const;
  int aggregator_id() const;  // UsageError if there is none
  int num_clients() const;
  // Ring successor in list order; wraps around.
  int successor(int client_id) const;
  bool has_edge(const Edge& e) const;

  // Structural invariants for the declared kind, plus connectivity.
  void validate() const;
};

// Hub-and-spoke graph with one aggregator node.
NetworkTopology build_star(std::span<const int> client_capacities,
                           int aggregator_capacity);

// Single cycle c0 -> c1 -> ... -> c_{k-1} -> c0 over >= 2 clients.
NetworkTopology build_ring(std::span<const int> client_capacities);

// CapacityError when a circuit needs more qubits than its node offers.
void check_capacity(const NodeSpec& node, const vqc::CircuitSpec& spec);

struct LinkStats {
  std::uint64_t messages_sent = 0;
  std::uint64_t payload_bytes = 0;
};

// Per-edge counters for the classical weight exchanges; 8 bytes per weight.
class LinkLedger {
 public:
  explicit LinkLedger(const NetworkTopology& topology);

  // UsageError on an edge the topology does not contain.
  void send_weights(const Edge& edge, std::size_t weight_count);

  const LinkStats& stats(const Edge& edge) const;
  LinkStats totals() const;

 private:
  std::size_t edge_index(const Edge& edge) const;

  std::vector<Edge> edges_;
  std::vector<LinkStats> stats_;
};

}  // namespace qfl::netmodel
