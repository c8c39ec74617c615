#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "simlab/algokit.hpp"

namespace simlab {
namespace {

TEST(Avl, SingleRotationOnAscendingInsert) {
  AvlTree t;
  t.insert(1);
  t.insert(2);
  const StepTrace s = t.insert(3);
  EXPECT_EQ(s.count(StepKind::rotate_left), 1u);
  EXPECT_EQ(s.count(StepKind::rotate_right), 0u);
  EXPECT_EQ(t.root()->key, 2);
  EXPECT_EQ(t.height(), 2);
}

TEST(Avl, DoubleRotationOnZigZag) {
  AvlTree t;
  t.insert(3);
  t.insert(1);
  const StepTrace s = t.insert(2);
  ASSERT_EQ(s.count(StepKind::rotate_left), 1u);
  ASSERT_EQ(s.count(StepKind::rotate_right), 1u);
  EXPECT_EQ(t.root()->key, 2);
  EXPECT_TRUE(t.verify());
}

TEST(Avl, EraseWithTwoChildrenUsesSuccessor) {
  AvlTree t;
  for (int k : {50, 30, 70, 60, 80}) t.insert(k);
  const StepTrace s = t.erase(50);
  auto swap = std::find_if(s.steps().begin(), s.steps().end(),
                           [](const AlgoStep& a) { return a.kind == StepKind::swap; });
  ASSERT_NE(swap, s.steps().end());
  EXPECT_EQ(swap->operands, (std::vector<std::int64_t>{50, 60}));
  EXPECT_EQ(t.root()->key, 60);
  EXPECT_EQ(t.in_order(), (std::vector<std::int64_t>{30, 60, 70, 80}));
}

TEST(Avl, DuplicateAndMissingKeysThrow) {
  AvlTree t;
  t.insert(4);
  try {
    t.insert(4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::duplicate_key);
  }
  try {
    t.erase(5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::key_not_found);
  }
  EXPECT_EQ(t.size(), 1u);
}

// Random inserts and deletes checked against std::set after every step.
TEST(Avl, RandomOperationsKeepInvariants) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> key(0, 2000);
  AvlTree t;
  std::set<std::int64_t> model;
  for (int i = 0; i < 3000; ++i) {
    const std::int64_t k = key(rng);
    if (model.contains(k)) {
      t.erase(k);
      model.erase(k);
    } else {
      t.insert(k);
      model.insert(k);
    }
    ASSERT_TRUE(t.verify()) << "after op " << i;
    ASSERT_LE(t.height(), oracle::avl_height_bound(t.size()));
  }
  EXPECT_EQ(t.in_order(), std::vector<std::int64_t>(model.begin(), model.end()));
}

TEST(Avl, ReplayRebuildsTheSameShape) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> key(0, 300);
  AvlTree live;
  AvlTree copy;
  for (int i = 0; i < 500; ++i) {
    const std::int64_t k = key(rng);
    const StepTrace s = live.contains(k) ? live.erase(k) : live.insert(k);
    copy.replay(s);
    ASSERT_TRUE(copy.same_shape(live)) << "after op " << i;
  }
}

TEST(Heap, DrainMatchesSortedInput) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> val(-50, 50);
  for (HeapMode mode : {HeapMode::min, HeapMode::max}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::int64_t> in(static_cast<std::size_t>(trial * 3 + 1));
      for (auto& v : in) v = val(rng);
      BinaryHeap h(mode);
      BinaryHeap shadow(mode);
      for (auto v : in) {
        shadow.replay(h.insert(v));
        ASSERT_TRUE(h.verify());
      }
      std::vector<std::int64_t> out;
      while (!h.empty()) {
        auto [top, steps] = h.extract();
        shadow.replay(steps);
        ASSERT_TRUE(h.verify());
        ASSERT_EQ(shadow.array(), h.array());
        out.push_back(top);
      }
      std::vector<std::int64_t> want = in;
      if (mode == HeapMode::min) {
        std::sort(want.begin(), want.end());
      } else {
        std::sort(want.rbegin(), want.rend());
      }
      EXPECT_EQ(out, want);
    }
  }
}

TEST(Heap, EmptyExtractThrows) {
  BinaryHeap h;
  try {
    h.extract();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_heap);
  }
}

TEST(Topo, LowestReadyVertexFirst) {
  DiGraph g;
  g.vertices = 4;
  g.add_edge(3, 0);
  g.add_edge(2, 1);
  EXPECT_EQ(topo_sort(g).order, (std::vector<int>{2, 1, 3, 0}));
}

TEST(Topo, RandomDagsRespectEveryEdge) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const DiGraph g = oracle::random_dag(rng, 1 + i % 30, 0.2);
    const TopoResult r = topo_sort(g);
    EXPECT_TRUE(oracle::respects_edges(g, r.order));
    EXPECT_EQ(r.trace.count(StepKind::emit), static_cast<std::size_t>(g.vertices));
  }
}

TEST(Topo, CycleWitnessContainsACycle) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    DiGraph g = oracle::random_dag(rng, 10, 0.2);
    // Close a cycle through three vertices.
    g.add_edge(1, 4);
    g.add_edge(4, 7);
    g.add_edge(7, 1);
    try {
      topo_sort(g);
      FAIL();
    } catch (const CycleDetected& e) {
      EXPECT_EQ(e.code(), Errc::cycle_detected);
      for (int v : {1, 4, 7}) EXPECT_NE(std::find(e.witness().begin(), e.witness().end(), v), e.witness().end());
      EXPECT_TRUE(oracle::has_cycle(oracle::induced(g, e.witness())));
    }
  }
}

TEST(Dijkstra, MatchesBellmanFord) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const DiGraph g = oracle::random_graph(rng, 2 + i % 20, 0.15, 20);
    const int src = i % g.vertices;
    const DijkstraResult r = dijkstra(g, src);
    EXPECT_EQ(r.dist, oracle::bellman_ford(g, src)) << "graph " << i;
    // Each predecessor edge is tight.
    for (int v = 0; v < g.vertices; ++v) {
      const auto& p = r.pred[static_cast<std::size_t>(v)];
      if (!p) continue;
      bool tight = false;
      for (const Edge& e : g.edges) {
        tight |= e.from == *p && e.to == v &&
                 *r.dist[static_cast<std::size_t>(*p)] + e.weight == *r.dist[static_cast<std::size_t>(v)];
      }
      EXPECT_TRUE(tight);
    }
  }
}

TEST(Dijkstra, NegativeWeightRejected) {
  DiGraph g;
  g.vertices = 2;
  g.add_edge(0, 1, -1);
  try {
    dijkstra(g, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::negative_weight);
  }
}

TEST(Workspace, ActionsProduceStepRecords) {
  AlgoWorkspace ws;
  auto steps = ws.apply(json::parse(R"({"algo": "avl", "name": "t", "op": "insert", "keys": [1, 2, 3]})"));
  ASSERT_FALSE(steps.empty());
  EXPECT_EQ(steps[0]["step"], "insert");
  EXPECT_EQ(steps[0]["name"], "t");
  EXPECT_TRUE(std::any_of(steps.begin(), steps.end(), [](const json& s) { return s["step"] == "rotate_left"; }));
  ws.apply(json::parse(R"({"algo": "heap", "name": "h", "mode": "max", "op": "insert", "keys": [4, 9, 2]})"));
  ws.apply(json::parse(R"({"algo": "heap", "name": "h", "op": "extract"})"));
  const json d = ws.describe();
  EXPECT_EQ(d["avl"]["t"], json::parse("[1,2,3]"));
  EXPECT_EQ(d["heap"]["h"]["array"][0], 4);
}

TEST(Workspace, MalformedActionsCarryAPath) {
  try {
    validate_algo_action(json::parse(R"({"algo": "dijkstra", "vertices": 2, "edges": [[0, 5, 1]], "source": 0})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_ref);
    EXPECT_EQ(e.path(), "edges/0");
  }
}

}  // namespace
}  // namespace simlab
