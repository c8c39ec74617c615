#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "simlab/error.hpp"

namespace simlab {

using json = nlohmann::json;

enum class StepKind {
  compare,
  swap,
  insert,
  erase,  // "delete" on the wire
  rotate_left,
  rotate_right,
  visit,
  enqueue,
  dequeue,
  relax,
  settle,
  emit,
};

std::string_view to_string(StepKind kind);
std::optional<StepKind> step_kind_from_string(std::string_view name);

struct AlgoStep {
  std::size_t index = 0;
  StepKind kind = StepKind::compare;
  std::vector<std::int64_t> operands;
  std::string annotation;

  bool operator==(const AlgoStep&) const = default;
};

class StepTrace {
 public:
  void add(StepKind kind, std::vector<std::int64_t> operands, std::string annotation = {});
  const std::vector<AlgoStep>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  std::size_t count(StepKind kind) const;

 private:
  std::vector<AlgoStep> steps_;
};

json to_json(const AlgoStep& step);

// AVL

class AvlTree {
 public:
  struct Node {
    std::int64_t key = 0;
    int height = 1;
    std::unique_ptr<Node> left, right;
  };

  AvlTree() = default;
  AvlTree(const AvlTree& other);
  AvlTree& operator=(const AvlTree& other);
  AvlTree(AvlTree&&) noexcept = default;
  AvlTree& operator=(AvlTree&&) noexcept = default;

  /// Throws Errc::duplicate_key.
  StepTrace insert(std::int64_t key);
  /// Removes via in-order successor replacement. Throws Errc::key_not_found.
  StepTrace erase(std::int64_t key);

  bool contains(std::int64_t key) const;
  std::size_t size() const { return size_; }
  int height() const { return root_ ? root_->height : 0; }
  const Node* root() const { return root_.get(); }
  std::vector<std::int64_t> in_order() const;

  /// Full scan: BST order, balance factors and stored heights.
  bool verify() const;
  /// Shape and key equality, including stored heights.
  bool same_shape(const AvlTree& other) const;

  /// Applies the structural steps of a trace (insert, swap, delete,
  /// rotate_*); compare/visit steps are ignored. Heights are recomputed.
  void replay(const StepTrace& trace);

  json to_json() const;

 private:
  using Link = std::unique_ptr<Node>;

  void insert_at(Link& slot, std::int64_t key, std::int64_t parent, int side, StepTrace& t);
  void erase_at(Link& slot, std::int64_t key, StepTrace& t);
  void rebalance(Link& slot, StepTrace& t);
  static void rotate_left(Link& slot);
  static void rotate_right(Link& slot);
  static void fix_height(Node& n);
  static int h(const Link& n) { return n ? n->height : 0; }
  static int balance(const Node& n) { return h(n.left) - h(n.right); }
  Link* slot_of(std::int64_t key);

  Link root_;
  std::size_t size_ = 0;
};

// Binary heap

enum class HeapMode { min, max };

class BinaryHeap {
 public:
  explicit BinaryHeap(HeapMode mode = HeapMode::min) : mode_(mode) {}

  StepTrace insert(std::int64_t key);
  /// Throws Errc::empty_heap.
  std::pair<std::int64_t, StepTrace> extract();

  HeapMode mode() const { return mode_; }
  std::size_t size() const { return a_.size(); }
  bool empty() const { return a_.empty(); }
  std::int64_t top() const;
  const std::vector<std::int64_t>& array() const { return a_; }
  bool verify() const;

  /// Applies insert (append), swap(i, j) and delete (last moves to root).
  void replay(const StepTrace& trace);

 private:
  bool before(std::int64_t a, std::int64_t b) const { return mode_ == HeapMode::min ? a < b : a > b; }

  HeapMode mode_;
  std::vector<std::int64_t> a_;
};

// Graphs

struct Edge {
  int from = 0;
  int to = 0;
  std::int64_t weight = 1;
};

struct DiGraph {
  int vertices = 0;
  std::vector<Edge> edges;

  void add_edge(int from, int to, std::int64_t weight = 1) { edges.push_back({from, to, weight}); }
};

class CycleDetected : public Error {
 public:
  explicit CycleDetected(std::vector<int> witness);
  const std::vector<int>& witness() const noexcept { return witness_; }

 private:
  std::vector<int> witness_;
};

struct TopoResult {
  std::vector<int> order;
  StepTrace trace;
};

/// Kahn's algorithm; among ready vertices the lowest id goes first.
/// Throws CycleDetected with the vertices left over.
TopoResult topo_sort(const DiGraph& g);

struct DijkstraResult {
  std::vector<std::optional<std::int64_t>> dist;  // nullopt: unreachable
  std::vector<std::optional<int>> pred;
  StepTrace trace;
};

/// Throws Errc::negative_weight.
DijkstraResult dijkstra(const DiGraph& g, int src);

/// Checks the shape of an "algo" action without running it. Throws Error
/// with a path relative to the action object.
void validate_algo_action(const json& action);

/// Named structures living for the duration of one simulation run, driven
/// by scenario "algo" actions.
class AlgoWorkspace {
 public:
  /// Runs one action and returns the algo_step detail records it produced.
  std::vector<json> apply(const json& action);

  json describe() const;

 private:
  std::map<std::string, AvlTree> avl_;
  std::map<std::string, BinaryHeap> heaps_;
};

}  // namespace simlab
