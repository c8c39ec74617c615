#include "simlab/algokit.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <queue>
#include <utility>

namespace simlab {

namespace {

constexpr std::array<std::pair<StepKind, std::string_view>, 12> kStepNames{{
    {StepKind::compare, "compare"},
    {StepKind::swap, "swap"},
    {StepKind::insert, "insert"},
    {StepKind::erase, "delete"},
    {StepKind::rotate_left, "rotate_left"},
    {StepKind::rotate_right, "rotate_right"},
    {StepKind::visit, "visit"},
    {StepKind::enqueue, "enqueue"},
    {StepKind::dequeue, "dequeue"},
    {StepKind::relax, "relax"},
    {StepKind::settle, "settle"},
    {StepKind::emit, "emit"},
}};

}  // namespace

std::string_view to_string(StepKind kind) {
  for (const auto& [k, name] : kStepNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<StepKind> step_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kStepNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

void StepTrace::add(StepKind kind, std::vector<std::int64_t> operands, std::string annotation) {
  steps_.push_back(AlgoStep{steps_.size(), kind, std::move(operands), std::move(annotation)});
}

std::size_t StepTrace::count(StepKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(steps_.begin(), steps_.end(), [kind](const AlgoStep& s) { return s.kind == kind; }));
}

json to_json(const AlgoStep& step) {
  json j{{"index", step.index}, {"step", to_string(step.kind)}, {"operands", step.operands}};
  if (!step.annotation.empty()) j["annotation"] = step.annotation;
  return j;
}

// AVL

namespace {

std::unique_ptr<AvlTree::Node> clone(const std::unique_ptr<AvlTree::Node>& n) {
  if (!n) return nullptr;
  auto c = std::make_unique<AvlTree::Node>();
  c->key = n->key;
  c->height = n->height;
  c->left = clone(n->left);
  c->right = clone(n->right);
  return c;
}

}  // namespace

AvlTree::AvlTree(const AvlTree& other) : root_(clone(other.root_)), size_(other.size_) {}

AvlTree& AvlTree::operator=(const AvlTree& other) {
  if (this != &other) {
    root_ = clone(other.root_);
    size_ = other.size_;
  }
  return *this;
}

void AvlTree::fix_height(Node& n) { n.height = 1 + std::max(h(n.left), h(n.right)); }

void AvlTree::rotate_left(Link& slot) {
  Link pivot = std::move(slot);
  Link up = std::move(pivot->right);
  pivot->right = std::move(up->left);
  fix_height(*pivot);
  up->left = std::move(pivot);
  fix_height(*up);
  slot = std::move(up);
}

void AvlTree::rotate_right(Link& slot) {
  Link pivot = std::move(slot);
  Link up = std::move(pivot->left);
  pivot->left = std::move(up->right);
  fix_height(*pivot);
  up->right = std::move(pivot);
  fix_height(*up);
  slot = std::move(up);
}

void AvlTree::rebalance(Link& slot, StepTrace& t) {
  Node& n = *slot;
  fix_height(n);
  const int b = balance(n);
  if (b > 1) {
    if (balance(*n.left) < 0) {
      t.add(StepKind::rotate_left, {n.left->key});
      rotate_left(n.left);
    }
    t.add(StepKind::rotate_right, {n.key});
    rotate_right(slot);
  } else if (b < -1) {
    if (balance(*n.right) > 0) {
      t.add(StepKind::rotate_right, {n.right->key});
      rotate_right(n.right);
    }
    t.add(StepKind::rotate_left, {n.key});
    rotate_left(slot);
  }
}

StepTrace AvlTree::insert(std::int64_t key) {
  if (contains(key)) throw Error(Errc::duplicate_key, "key " + std::to_string(key) + " already present");
  StepTrace t;
  insert_at(root_, key, 0, 0, t);
  ++size_;
  return t;
}

// side: 0 root, -1 left child of parent, 1 right child.
void AvlTree::insert_at(Link& slot, std::int64_t key, std::int64_t parent, int side, StepTrace& t) {
  if (!slot) {
    slot = std::make_unique<Node>();
    slot->key = key;
    if (side == 0) {
      t.add(StepKind::insert, {key}, "root");
    } else {
      t.add(StepKind::insert, {key, parent, side}, side < 0 ? "left" : "right");
    }
    return;
  }
  t.add(StepKind::compare, {key, slot->key});
  if (key < slot->key) {
    insert_at(slot->left, key, slot->key, -1, t);
  } else {
    insert_at(slot->right, key, slot->key, 1, t);
  }
  rebalance(slot, t);
}

StepTrace AvlTree::erase(std::int64_t key) {
  if (!contains(key)) throw Error(Errc::key_not_found, "key " + std::to_string(key) + " not present");
  StepTrace t;
  erase_at(root_, key, t);
  --size_;
  return t;
}

void AvlTree::erase_at(Link& slot, std::int64_t key, StepTrace& t) {
  t.add(StepKind::compare, {key, slot->key});
  if (key < slot->key) {
    erase_at(slot->left, key, t);
  } else if (key > slot->key) {
    erase_at(slot->right, key, t);
  } else if (slot->left && slot->right) {
    Node* succ = slot->right.get();
    while (succ->left) succ = succ->left.get();
    t.add(StepKind::swap, {slot->key, succ->key}, "successor");
    std::swap(slot->key, succ->key);
    erase_at(slot->right, key, t);
  } else {
    t.add(StepKind::erase, {key});
    slot = slot->left ? std::move(slot->left) : std::move(slot->right);
  }
  if (slot) rebalance(slot, t);
}

bool AvlTree::contains(std::int64_t key) const {
  const Node* n = root_.get();
  while (n) {
    if (key == n->key) return true;
    n = key < n->key ? n->left.get() : n->right.get();
  }
  return false;
}

std::vector<std::int64_t> AvlTree::in_order() const {
  std::vector<std::int64_t> out;
  out.reserve(size_);
  std::function<void(const Node*)> walk = [&](const Node* n) {
    if (!n) return;
    walk(n->left.get());
    out.push_back(n->key);
    walk(n->right.get());
  };
  walk(root_.get());
  return out;
}

bool AvlTree::verify() const {
  // Returns the true height, or -1 on any violation.
  std::function<int(const Node*, std::optional<std::int64_t>, std::optional<std::int64_t>)> scan =
      [&](const Node* n, std::optional<std::int64_t> lo, std::optional<std::int64_t> hi) -> int {
    if (!n) return 0;
    if ((lo && n->key <= *lo) || (hi && n->key >= *hi)) return -1;
    const int l = scan(n->left.get(), lo, n->key);
    const int r = scan(n->right.get(), n->key, hi);
    if (l < 0 || r < 0 || std::abs(l - r) > 1) return -1;
    const int height = 1 + std::max(l, r);
    return height == n->height ? height : -1;
  };
  return scan(root_.get(), std::nullopt, std::nullopt) >= 0 && in_order().size() == size_;
}

bool AvlTree::same_shape(const AvlTree& other) const {
  std::function<bool(const Node*, const Node*)> eq = [&](const Node* a, const Node* b) {
    if (!a || !b) return a == b;
    return a->key == b->key && a->height == b->height && eq(a->left.get(), b->left.get()) &&
           eq(a->right.get(), b->right.get());
  };
  return size_ == other.size_ && eq(root_.get(), other.root_.get());
}

AvlTree::Link* AvlTree::slot_of(std::int64_t key) {
  std::function<Link*(Link&)> find = [&](Link& slot) -> Link* {
    if (!slot) return nullptr;
    if (slot->key == key) return &slot;
    if (Link* l = find(slot->left)) return l;
    return find(slot->right);
  };
  return find(root_);
}

void AvlTree::replay(const StepTrace& trace) {
  auto require = [this](std::int64_t key) -> Link& {
    Link* s = slot_of(key);
    if (s == nullptr) throw Error(Errc::key_not_found, "replay refers to missing key " + std::to_string(key));
    return *s;
  };
  for (const AlgoStep& s : trace.steps()) {
    switch (s.kind) {
      case StepKind::insert: {
        auto n = std::make_unique<Node>();
        n->key = s.operands.at(0);
        if (s.operands.size() == 1) {
          root_ = std::move(n);
        } else {
          Link& parent = require(s.operands.at(1));
          (s.operands.at(2) < 0 ? parent->left : parent->right) = std::move(n);
        }
        ++size_;
        break;
      }
      case StepKind::swap: {
        Link& a = require(s.operands.at(0));
        Link& b = require(s.operands.at(1));
        std::swap(a->key, b->key);
        break;
      }
      case StepKind::erase: {
        Link& slot = require(s.operands.at(0));
        slot = slot->left ? std::move(slot->left) : std::move(slot->right);
        --size_;
        break;
      }
      case StepKind::rotate_left: rotate_left(require(s.operands.at(0))); break;
      case StepKind::rotate_right: rotate_right(require(s.operands.at(0))); break;
      default: break;
    }
  }
  std::function<int(Link&)> heights = [&](Link& n) -> int {
    if (!n) return 0;
    n->height = 1 + std::max(heights(n->left), heights(n->right));
    return n->height;
  };
  heights(root_);
}

json AvlTree::to_json() const {
  std::function<json(const Node*)> dump = [&](const Node* n) -> json {
    if (!n) return nullptr;
    return {{"key", n->key}, {"height", n->height}, {"left", dump(n->left.get())}, {"right", dump(n->right.get())}};
  };
  return dump(root_.get());
}

// Heap

StepTrace BinaryHeap::insert(std::int64_t key) {
  StepTrace t;
  a_.push_back(key);
  std::size_t i = a_.size() - 1;
  t.add(StepKind::insert, {key, static_cast<std::int64_t>(i)});
  while (i > 0) {
    const std::size_t p = (i - 1) / 2;
    t.add(StepKind::compare, {static_cast<std::int64_t>(i), static_cast<std::int64_t>(p)});
    if (!before(a_[i], a_[p])) break;
    t.add(StepKind::swap, {static_cast<std::int64_t>(i), static_cast<std::int64_t>(p)});
    std::swap(a_[i], a_[p]);
    i = p;
  }
  return t;
}

std::pair<std::int64_t, StepTrace> BinaryHeap::extract() {
  if (a_.empty()) throw Error(Errc::empty_heap, "extract from an empty heap");
  StepTrace t;
  const std::int64_t root = a_.front();
  t.add(StepKind::erase, {root, static_cast<std::int64_t>(a_.size() - 1)}, "last to root");
  a_.front() = a_.back();
  a_.pop_back();
  std::size_t i = 0;
  const std::size_t n = a_.size();
  while (true) {
    std::size_t best = i;
    for (std::size_t c : {2 * i + 1, 2 * i + 2}) {
      if (c >= n) continue;
      t.add(StepKind::compare, {static_cast<std::int64_t>(c), static_cast<std::int64_t>(best)});
      if (before(a_[c], a_[best])) best = c;
    }
    if (best == i) break;
    t.add(StepKind::swap, {static_cast<std::int64_t>(i), static_cast<std::int64_t>(best)});
    std::swap(a_[i], a_[best]);
    i = best;
  }
  return {root, std::move(t)};
}

std::int64_t BinaryHeap::top() const {
  if (a_.empty()) throw Error(Errc::empty_heap, "heap is empty");
  return a_.front();
}

bool BinaryHeap::verify() const {
  for (std::size_t i = 1; i < a_.size(); ++i) {
    if (before(a_[i], a_[(i - 1) / 2])) return false;
  }
  return true;
}

void BinaryHeap::replay(const StepTrace& trace) {
  for (const AlgoStep& s : trace.steps()) {
    switch (s.kind) {
      case StepKind::insert: a_.push_back(s.operands.at(0)); break;
      case StepKind::swap:
        std::swap(a_.at(static_cast<std::size_t>(s.operands.at(0))), a_.at(static_cast<std::size_t>(s.operands.at(1))));
        break;
      case StepKind::erase:
        a_.front() = a_.back();
        a_.pop_back();
        break;
      default: break;
    }
  }
}

// Graphs

namespace {

std::vector<std::vector<Edge>> adjacency(const DiGraph& g) {
  if (g.vertices < 0) throw Error(Errc::out_of_range, "negative vertex count");
  std::vector<std::vector<Edge>> adj(static_cast<std::size_t>(g.vertices));
  for (const Edge& e : g.edges) {
    if (e.from < 0 || e.from >= g.vertices || e.to < 0 || e.to >= g.vertices) {
      throw Error(Errc::out_of_range, "edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                                          " references a missing vertex");
    }
    adj[static_cast<std::size_t>(e.from)].push_back(e);
  }
  return adj;
}

std::string witness_text(const std::vector<int>& w) {
  std::string s;
  for (int v : w) s += (s.empty() ? "" : ",") + std::to_string(v);
  return s;
}

}  // namespace

CycleDetected::CycleDetected(std::vector<int> witness)
    : Error(Errc::cycle_detected, "cycle among vertices {" + witness_text(witness) + "}"),
      witness_(std::move(witness)) {}

TopoResult topo_sort(const DiGraph& g) {
  const auto adj = adjacency(g);
  std::vector<int> indeg(static_cast<std::size_t>(g.vertices), 0);
  for (const Edge& e : g.edges) ++indeg[static_cast<std::size_t>(e.to)];

  TopoResult r;
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < g.vertices; ++v) {
    if (indeg[static_cast<std::size_t>(v)] == 0) {
      r.trace.add(StepKind::enqueue, {v});
      ready.push(v);
    }
  }
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    r.trace.add(StepKind::dequeue, {u});
    r.trace.add(StepKind::emit, {u, static_cast<std::int64_t>(r.order.size())});
    r.order.push_back(u);
    for (const Edge& e : adj[static_cast<std::size_t>(u)]) {
      r.trace.add(StepKind::visit, {u, e.to});
      if (--indeg[static_cast<std::size_t>(e.to)] == 0) {
        r.trace.add(StepKind::enqueue, {e.to});
        ready.push(e.to);
      }
    }
  }
  if (static_cast<int>(r.order.size()) < g.vertices) {
    std::vector<int> residual;
    for (int v = 0; v < g.vertices; ++v) {
      if (indeg[static_cast<std::size_t>(v)] > 0) residual.push_back(v);
    }
    throw CycleDetected(std::move(residual));
  }
  return r;
}

DijkstraResult dijkstra(const DiGraph& g, int src) {
  const auto adj = adjacency(g);
  if (src < 0 || src >= g.vertices) throw Error(Errc::out_of_range, "source vertex out of range");
  for (const Edge& e : g.edges) {
    if (e.weight < 0) {
      throw Error(Errc::negative_weight,
                  "edge " + std::to_string(e.from) + "->" + std::to_string(e.to) + " has negative weight");
    }
  }

  const auto n = static_cast<std::size_t>(g.vertices);
  DijkstraResult r;
  r.dist.assign(n, std::nullopt);
  r.pred.assign(n, std::nullopt);
  std::vector<bool> settled(n, false);
  using Item = std::pair<std::int64_t, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;

  r.dist[static_cast<std::size_t>(src)] = 0;
  pq.emplace(0, src);
  r.trace.add(StepKind::enqueue, {src, 0});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    const auto ui = static_cast<std::size_t>(u);
    r.trace.add(StepKind::dequeue, {u, d});
    if (settled[ui] || d > *r.dist[ui]) continue;  // stale entry
    settled[ui] = true;
    r.trace.add(StepKind::settle, {u, d});
    for (const Edge& e : adj[ui]) {
      const auto vi = static_cast<std::size_t>(e.to);
      const std::int64_t nd = d + e.weight;
      if (r.dist[vi] && nd >= *r.dist[vi]) continue;
      r.dist[vi] = nd;
      r.pred[vi] = u;
      r.trace.add(StepKind::relax, {u, e.to, nd});
      pq.emplace(nd, e.to);
      r.trace.add(StepKind::enqueue, {e.to, nd});
    }
  }
  return r;
}

// Workspace

namespace {

const json& field(const json& action, const char* name) {
  if (!action.contains(name)) throw Error(Errc::missing_field, std::string("missing field ") + name, name);
  return action.at(name);
}

std::vector<std::int64_t> int_list(const json& action, const char* name) {
  const json& v = field(action, name);
  if (!v.is_array()) throw Error(Errc::bad_type, std::string(name) + " must be an array of integers", name);
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) {
      throw Error(Errc::bad_type, std::string(name) + " must be an array of integers",
                  std::string(name) + "/" + std::to_string(i));
    }
    out.push_back(v[i].get<std::int64_t>());
  }
  return out;
}

std::string str_field(const json& action, const char* name) {
  const json& v = field(action, name);
  if (!v.is_string()) throw Error(Errc::bad_type, std::string(name) + " must be a string", name);
  return v.get<std::string>();
}

DiGraph graph_of(const json& action, bool weighted) {
  DiGraph g;
  const json& n = field(action, "vertices");
  if (!n.is_number_integer() || n.get<std::int64_t>() < 0 || n.get<std::int64_t>() > 100000) {
    throw Error(Errc::out_of_range, "vertices must be a small non-negative integer", "vertices");
  }
  g.vertices = n.get<int>();
  const json& edges = field(action, "edges");
  if (!edges.is_array()) throw Error(Errc::bad_type, "edges must be an array", "edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const json& e = edges[i];
    const std::string path = "edges/" + std::to_string(i);
    const std::size_t want = weighted ? 3 : 2;
    if (!e.is_array() || e.size() < 2 || e.size() > 3 || (weighted && e.size() != want)) {
      throw Error(Errc::bad_type, weighted ? "edge must be [from, to, weight]" : "edge must be [from, to]", path);
    }
    for (const json& x : e) {
      if (!x.is_number_integer()) throw Error(Errc::bad_type, "edge fields must be integers", path);
    }
    const auto from = e[0].get<std::int64_t>();
    const auto to = e[1].get<std::int64_t>();
    if (from < 0 || to < 0 || from >= g.vertices || to >= g.vertices) {
      throw Error(Errc::unknown_ref, "edge references a missing vertex", path);
    }
    g.add_edge(static_cast<int>(from), static_cast<int>(to), e.size() == 3 ? e[2].get<std::int64_t>() : 1);
  }
  return g;
}

HeapMode heap_mode(const json& action) {
  if (!action.contains("mode")) return HeapMode::min;
  const json& m = action.at("mode");
  if (m == "min") return HeapMode::min;
  if (m == "max") return HeapMode::max;
  throw Error(Errc::out_of_range, "mode must be min or max", "mode");
}

}  // namespace

void validate_algo_action(const json& action) {
  const std::string algo = str_field(action, "algo");
  if (algo == "avl") {
    str_field(action, "name");
    const std::string op = str_field(action, "op");
    if (op != "insert" && op != "delete") throw Error(Errc::out_of_range, "avl op must be insert or delete", "op");
    int_list(action, "keys");
  } else if (algo == "heap") {
    str_field(action, "name");
    heap_mode(action);
    const std::string op = str_field(action, "op");
    if (op == "insert") {
      int_list(action, "keys");
    } else if (op == "extract") {
      if (action.contains("count") && (!action["count"].is_number_integer() || action["count"].get<int>() < 1)) {
        throw Error(Errc::out_of_range, "count must be a positive integer", "count");
      }
    } else {
      throw Error(Errc::out_of_range, "heap op must be insert or extract", "op");
    }
  } else if (algo == "topo_sort") {
    graph_of(action, false);
  } else if (algo == "dijkstra") {
    DiGraph g = graph_of(action, true);
    const json& s = field(action, "source");
    if (!s.is_number_integer() || s.get<std::int64_t>() < 0 || s.get<std::int64_t>() >= g.vertices) {
      throw Error(Errc::unknown_ref, "source must be a vertex id", "source");
    }
  } else {
    throw Error(Errc::out_of_range, "unknown algo " + algo, "algo");
  }
}

std::vector<json> AlgoWorkspace::apply(const json& action) {
  validate_algo_action(action);
  const std::string algo = action.at("algo").get<std::string>();
  std::vector<json> out;
  auto record = [&](const StepTrace& t, std::string_view op, int operation) {
    for (const AlgoStep& s : t.steps()) {
      json d = to_json(s);
      d["algo"] = algo;
      d["op"] = op;
      d["operation"] = operation;
      if (action.contains("name")) d["name"] = action.at("name");
      out.push_back(std::move(d));
    }
  };

  if (algo == "avl") {
    AvlTree& tree = avl_[action.at("name").get<std::string>()];
    const std::string op = action.at("op").get<std::string>();
    int k = 0;
    for (std::int64_t key : int_list(action, "keys")) {
      record(op == "insert" ? tree.insert(key) : tree.erase(key), op, k++);
    }
  } else if (algo == "heap") {
    const std::string name = action.at("name").get<std::string>();
    auto it = heaps_.try_emplace(name, heap_mode(action)).first;
    BinaryHeap& heap = it->second;
    if (action.at("op") == "insert") {
      int k = 0;
      for (std::int64_t key : int_list(action, "keys")) record(heap.insert(key), "insert", k++);
    } else {
      const int count = action.value("count", 1);
      for (int k = 0; k < count; ++k) record(heap.extract().second, "extract", k);
    }
  } else if (algo == "topo_sort") {
    record(topo_sort(graph_of(action, false)).trace, "sort", 0);
  } else {
    record(dijkstra(graph_of(action, true), action.at("source").get<int>()).trace, "shortest_paths", 0);
  }
  return out;
}

json AlgoWorkspace::describe() const {
  json j = json::object();
  for (const auto& [name, tree] : avl_) j["avl"][name] = tree.in_order();
  for (const auto& [name, heap] : heaps_) {
    j["heap"][name] = {{"mode", heap.mode() == HeapMode::min ? "min" : "max"}, {"array", heap.array()}};
  }
  return j;
}

}  // namespace simlab
