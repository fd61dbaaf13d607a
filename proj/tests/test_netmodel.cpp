#include <doctest.h>

#include <vector>

#include "qfl/errors.hpp"
#include "qfl/netmodel.hpp"

using namespace qfl;
using netmodel::Edge;

TEST_CASE("star over the published capacities") {
  const std::vector<int> caps{4, 6, 10, 10};
  const netmodel::NetworkTopology t = netmodel::build_star(caps, 10);
  CHECK(t.nodes.size() == 5);
  CHECK(t.edges.size() == 4);
  CHECK(t.num_clients() == 4);
  const int hub = t.aggregator_id();
  CHECK(hub == 4);
  for (int client : t.client_ids()) {
    CHECK(t.has_edge(Edge(client, hub)));
  }
  t.validate();
}

TEST_CASE("single-client star") {
  const std::vector<int> caps{2};
  const netmodel::NetworkTopology t = netmodel::build_star(caps, 2);
  CHECK(t.nodes.size() == 2);
  CHECK(t.edges.size() == 1);
}

TEST_CASE("star rejects an empty client list") {
  CHECK_THROWS_AS(netmodel::build_star(std::vector<int>{}, 4), UsageError);
}

TEST_CASE("ring of three") {
  const std::vector<int> caps{2, 2, 2};
  const netmodel::NetworkTopology t = netmodel::build_ring(caps);
  CHECK(t.nodes.size() == 3);
  CHECK(t.edges.size() == 3);
  CHECK(t.successor(0) == 1);
  CHECK(t.successor(1) == 2);
  CHECK(t.successor(2) == 0);
  t.validate();
}

TEST_CASE("two-client ring keeps both successor directions") {
  const std::vector<int> caps{4, 6};
  const netmodel::NetworkTopology t = netmodel::build_ring(caps);
  CHECK(t.nodes.size() == 2);
  CHECK(t.edges.size() == 1);
  CHECK(t.successor(0) == 1);
  CHECK(t.successor(1) == 0);
}

TEST_CASE("ring needs two clients") {
  CHECK_THROWS_AS(netmodel::build_ring(std::vector<int>{3}), UsageError);
}

TEST_CASE("capacity admission") {
  const netmodel::NodeSpec node{0, 4, netmodel::NodeRole::Client};
  vqc::CircuitSpec fits{4, 10, encode::EmbeddingKind::Amplitude, 16};
  netmodel::check_capacity(node, fits);
  vqc::CircuitSpec too_big{6, 10, encode::EmbeddingKind::Amplitude, 16};
  CHECK_THROWS_AS(netmodel::check_capacity(node, too_big), CapacityError);
}

TEST_CASE("kind invariants are enforced") {
  netmodel::NetworkTopology broken = netmodel::build_star(std::vector<int>{2, 2}, 2);
  broken.edges.emplace_back(0, 1);  // client-to-client edge breaks the star
  CHECK_THROWS_AS(broken.validate(), UsageError);

  netmodel::NetworkTopology disconnected;
  disconnected.kind = netmodel::TopologyKind::Arbitrary;
  disconnected.nodes = {netmodel::NodeSpec{0, 2, netmodel::NodeRole::Client},
                        netmodel::NodeSpec{1, 2, netmodel::NodeRole::Client}};
  CHECK_THROWS_AS(disconnected.validate(), UsageError);
}

TEST_CASE("ledger counts messages and bytes") {
  const netmodel::NetworkTopology t = netmodel::build_star(std::vector<int>{2, 2, 2}, 2);
  netmodel::LinkLedger ledger(t);
  const Edge edge(0, t.aggregator_id());
  ledger.send_weights(edge, 16);
  CHECK(ledger.stats(edge).messages_sent == 1);
  CHECK(ledger.stats(edge).payload_bytes == 128);
  ledger.send_weights(edge, 16);
  CHECK(ledger.stats(edge).messages_sent == 2);
  CHECK(ledger.stats(edge).payload_bytes == 256);
  CHECK(ledger.totals().messages_sent == 2);

  CHECK_THROWS_AS(ledger.send_weights(Edge(0, 1), 4), UsageError);
}
