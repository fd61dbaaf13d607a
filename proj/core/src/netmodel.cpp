#include "qfl/netmodel.hpp"

#include <algorithm>
#include <string>

#include "qfl/errors.hpp"

namespace qfl::netmodel {

std::vector<int> NetworkTopology::client_ids() const {
  std::vector<int> ids;
  for (const NodeSpec& n : nodes) {
    if (n.role == NodeRole::Client) {
      ids.push_back(n.node_id);
    }
  }
  return ids;
}

int NetworkTopology::aggregator_id() const {
  for (const NodeSpec& n : nodes) {
    if (n.role == NodeRole::Aggregator) {
      return n.node_id;
    }
  }
  throw UsageError("topology has no aggregator node");
}

int NetworkTopology::num_clients() const {
  return static_cast<int>(client_ids().size());
}

int NetworkTopology::successor(int client_id) const {
  const std::vector<int> ids = client_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == client_id) {
      return ids[(i + 1) % ids.size()];
    }
  }
  throw UsageError("successor: unknown client id " + std::to_string(client_id));
}

bool NetworkTopology::has_edge(const Edge& e) const {
  return std::find(edges.begin(), edges.end(), e) != edges.end();
}

namespace {

int degree(const NetworkTopology& t, int node_id) {
  int d = 0;
  for (const Edge& e : t.edges) {
    if (e.a == node_id || e.b == node_id) {
      ++d;
    }
  }
  return d;
}

bool connected(const NetworkTopology& t) {
  if (t.nodes.empty()) {
    return false;
  }
  std::vector<int> stack{t.nodes.front().node_id};
  std::vector<bool> seen(t.nodes.size(), false);
  auto index_of = [&](int id) {
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      if (t.nodes[i].node_id == id) {
        return i;
      }
    }
    return t.nodes.size();
  };
  seen[index_of(stack.front())] = true;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    for (const Edge& e : t.edges) {
      int other = -1;
      if (e.a == id) {
        other = e.b;
      } else if (e.b == id) {
        other = e.a;
      } else {
        continue;
      }
      const std::size_t oi = index_of(other);
      if (oi < t.nodes.size() && !seen[oi]) {
        seen[oi] = true;
        ++visited;
        stack.push_back(other);
      }
    }
  }
  return visited == t.nodes.size();
}

}  // namespace

void NetworkTopology::validate() const {
  if (nodes.empty()) {
    throw UsageError("topology has no nodes");
  }
  for (const NodeSpec& n : nodes) {
    if (n.qubit_capacity < 1) {
      throw CapacityError("node " + std::to_string(n.node_id) +
                          " has non-positive qubit capacity");
    }
  }
  for (const Edge& e : edges) {
    if (e.a == e.b) {
      throw UsageError("self-loop on node " + std::to_string(e.a));
    }
  }
  if (!connected(*this)) {
    throw UsageError("topology graph is not connected");
  }
  if (kind == TopologyKind::Star) {
    int aggregators = 0;
    for (const NodeSpec& n : nodes) {
      aggregators += n.role == NodeRole::Aggregator ? 1 : 0;
    }
    if (aggregators != 1) {
      throw UsageError("star topology needs exactly one aggregator, found " +
                       std::to_string(aggregators));
    }
    const int hub = aggregator_id();
    for (const NodeSpec& n : nodes) {
      if (n.role == NodeRole::Client) {
        if (degree(*this, n.node_id) != 1 || !has_edge(Edge(n.node_id, hub))) {
          throw UsageError("star client " + std::to_string(n.node_id) +
                           " must connect to the aggregator only");
        }
      }
    }
    if (degree(*this, hub) != num_clients()) {
      throw UsageError("star hub degree must equal the client count");
    }
  } else if (kind == TopologyKind::Ring) {
    // A 2-ring is a single undirected link that carries both directed
    // hand-offs, so each node has degree 1 there.
    const int want_degree = nodes.size() == 2 ? 1 : 2;
    const std::size_t want_edges = nodes.size() == 2 ? 1 : nodes.size();
    for (const NodeSpec& n : nodes) {
      if (n.role == NodeRole::Aggregator) {
        throw UsageError("ring topology has no aggregator");
      }
      if (degree(*this, n.node_id) != want_degree) {
        throw UsageError("ring node " + std::to_string(n.node_id) +
                         " must have degree " + std::to_string(want_degree));
      }
    }
    if (edges.size() != want_edges) {
      throw UsageError("ring over k nodes needs exactly " +
                       std::to_string(want_edges) + " edges");
    }
  }
}

NetworkTopology build_star(std::span<const int> client_capacities,
                           int aggregator_capacity) {
  if (client_capacities.empty()) {
    throw UsageError("build_star: need at least one client");
  }
  NetworkTopology t;
  t.kind = TopologyKind::Star;
  const int k = static_cast<int>(client_capacities.size());
  for (int i = 0; i < k; ++i) {
    t.nodes.push_back(NodeSpec{i, client_capacities[i], NodeRole::Client});
  }
  t.nodes.push_back(NodeSpec{k, aggregator_capacity, NodeRole::Aggregator});
  for (int i = 0; i < k; ++i) {
    t.edges.emplace_back(i, k);
  }
  t.validate();
  return t;
}

NetworkTopology build_ring(std::span<const int> client_capacities) {
  if (client_capacities.size() < 2) {
    throw UsageError("build_ring: need at least two clients");
  }
  NetworkTopology t;
  t.kind = TopologyKind::Ring;
  const int k = static_cast<int>(client_capacities.size());
  for (int i = 0; i < k; ++i) {
    t.nodes.push_back(NodeSpec{i, client_capacities[i], NodeRole::Client});
  }
  for (int i = 0; i < k; ++i) {
    t.edges.emplace_back(i, (i + 1) % k);
  }
  if (k == 2) {
    t.edges.pop_back();  // both hand-off directions share the one link
  }
  t.validate();
  return t;
}

void check_capacity(const NodeSpec& node, const vqc::CircuitSpec& spec) {
  if (spec.num_qubits > node.qubit_capacity) {
    throw CapacityError("circuit needs " + std::to_string(spec.num_qubits) +
                        " qubits but node " + std::to_string(node.node_id) +
                        " offers " + std::to_string(node.qubit_capacity));
  }
}

LinkLedger::LinkLedger(const NetworkTopology& topology)
    : edges_(topology.edges), stats_(topology.edges.size()) {}

std::size_t LinkLedger::edge_index(const Edge& edge) const {
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (edges_[i] == edge) {
      return i;
    }
  }
  throw UsageError("ledger: unknown edge (" + std::to_string(edge.a) + ", " +
                   std::to_string(edge.b) + ")");
}

void LinkLedger::send_weights(const Edge& edge, std::size_t weight_count) {
  LinkStats& s = stats_[edge_index(edge)];
  s.messages_sent += 1;
  s.payload_bytes += 8 * static_cast<std::uint64_t>(weight_count);
}

const LinkStats& LinkLedger::stats(const Edge& edge) const {
  return stats_[edge_index(edge)];
}

LinkStats LinkLedger::totals() const {
  LinkStats total;
  for (const LinkStats& s : stats_) {
    total.messages_sent += s.messages_sent;
    total.payload_bytes += s.payload_bytes;
  }
  return total;
}

}  // namespace qfl::netmodel
