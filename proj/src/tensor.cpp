#include "bundleconn/tensor.hpp"

#include <algorithm>

#include "bundleconn/error.hpp"

namespace bundleconn {

int Space::num_vars() const {
  switch (kind) {
    case SpaceKind::M:
      return m;
    case SpaceKind::E:
      return m + n;
    case SpaceKind::J1E:
      return m + n + n * m;
  }
  return 0;
}

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::M:
      return "M";
    case SpaceKind::E:
      return "E";
    case SpaceKind::J1E:
      return "J1E";
  }
  return "?";
}

bool is_up(SlotKind k) { return k == SlotKind::BaseUp || k == SlotKind::FiberUp || k == SlotKind::TotalUp; }

SlotKind dual(SlotKind k) {
  switch (k) {
    case SlotKind::BaseUp:
      return SlotKind::BaseDown;
    case SlotKind::BaseDown:
      return SlotKind::BaseUp;
    case SlotKind::FiberUp:
      return SlotKind::FiberDown;
    case SlotKind::FiberDown:
      return SlotKind::FiberUp;
    case SlotKind::TotalUp:
      return SlotKind::TotalDown;
    case SlotKind::TotalDown:
      return SlotKind::TotalUp;
  }
  return k;
}

int slot_dim(SlotKind k, int m, int n) {
  switch (k) {
    case SlotKind::BaseUp:
    case SlotKind::BaseDown:
      return m;
    case SlotKind::FiberUp:
    case SlotKind::FiberDown:
      return n;
    case SlotKind::TotalUp:
    case SlotKind::TotalDown:
      return m + n;
  }
  return 0;
}

std::string to_string(SlotKind k) {
  switch (k) {
    case SlotKind::BaseUp:
      return "BaseUp";
    case SlotKind::BaseDown:
      return "BaseDown";
    case SlotKind::FiberUp:
      return "FiberUp";
    case SlotKind::FiberDown:
      return "FiberDown";
    case SlotKind::TotalUp:
      return "TotalUp";
    case SlotKind::TotalDown:
      return "TotalDown";
  }
  return "?";
}

TensorField::TensorField(Space space, Signature signature, int order)
    : space_(space), signature_(std::move(signature)) {
  if (space_.m < 1 || space_.n < 1) throw InputError("space dimensions must be positive");
  std::size_t total = 1;
  for (SlotKind k : signature_) {
    const int d = slot_dim(k, space_.m, space_.n);
    dims_.push_back(d);
    total *= static_cast<std::size_t>(d);
  }
  strides_.assign(dims_.size(), 1);
  for (int s = static_cast<int>(dims_.size()) - 2; s >= 0; --s) {
    strides_[static_cast<std::size_t>(s)] =
        strides_[static_cast<std::size_t>(s + 1)] * static_cast<std::size_t>(dims_[static_cast<std::size_t>(s + 1)]);
  }
  components_.assign(total, JetPoly(space_.num_vars(), order));
}

int TensorField::order() const {
  int o = 1 << 20;
  for (const auto& c : components_) o = std::min(o, c.order());
  return o;
}

std::size_t TensorField::offset(std::span<const int> index) const {
  if (index.size() != dims_.size()) throw InputError("tensor index has wrong rank");
  std::size_t off = 0;
  for (std::size_t s = 0; s < index.size(); ++s) {
    if (index[s] < 0 || index[s] >= dims_[s]) throw InputError("tensor index out of range");
    off += strides_[s] * static_cast<std::size_t>(index[s]);
  }
  return off;
}

JetPoly& TensorField::at(std::span<const int> index) { return components_[offset(index)]; }
const JetPoly& TensorField::at(std::span<const int> index) const { return components_[offset(index)]; }

std::vector<int> TensorField::unflatten(std::size_t k) const {
  std::vector<int> idx(dims_.size());
  for (std::size_t s = 0; s < dims_.size(); ++s) {
    idx[s] = static_cast<int>(k / strides_[s]);
    k %= strides_[s];
  }
  return idx;
}

bool TensorField::is_zero() const {
  return std::all_of(components_.begin(), components_.end(), [](const JetPoly& p) { return p.is_zero(); });
}

TensorField TensorField::truncated(int order) const {
  return map([order](const JetPoly& p) { return p.truncated(order); });
}

TensorField TensorField::map(const std::function<JetPoly(const JetPoly&)>& f) const {
  TensorField t = *this;
  for (auto& c : t.components_) c = f(c);
  return t;
}

namespace {

void check_same_shape(const TensorField& a, const TensorField& b) {
  if (!(a.space() == b.space())) throw InputError("tensor space mismatch");
  if (a.signature() != b.signature()) throw InputError("tensor signature mismatch");
}

}  // namespace

TensorField& TensorField::operator+=(const TensorField& other) {
  check_same_shape(*this, other);
  for (std::size_t k = 0; k < components_.size(); ++k) components_[k] += other.components_[k];
  return *this;
}

TensorField& TensorField::operator-=(const TensorField& other) {
  check_same_shape(*this, other);
  for (std::size_t k = 0; k < components_.size(); ++k) components_[k] -= other.components_[k];
  return *this;
}

TensorField& TensorField::operator*=(const Rational& c) {
  for (auto& p : components_) p *= c;
  return *this;
}

bool operator==(const TensorField& a, const TensorField& b) {
  return a.space_ == b.space_ && a.signature_ == b.signature_ && a.components_ == b.components_;
}

void for_each_index(const std::vector<int>& dims, const std::function<void(const std::vector<int>&)>& f) {
  for (int d : dims)
    if (d == 0) return;
  std::vector<int> idx(dims.size(), 0);
  while (true) {
    f(idx);
    int s = static_cast<int>(dims.size()) - 1;
    while (s >= 0) {
      if (++idx[static_cast<std::size_t>(s)] < dims[static_cast<std::size_t>(s)]) break;
      idx[static_cast<std::size_t>(s)] = 0;
      --s;
    }
    if (s < 0) return;
  }
}

TensorField tensor_product(const TensorField& a, const TensorField& b) {
  if (!(a.space() == b.space())) throw InputError("tensor_product: space mismatch");
  Signature sig = a.signature();
  sig.insert(sig.end(), b.signature().begin(), b.signature().end());
  TensorField t(a.space(), sig, std::min(a.order(), b.order()));
  std::size_t k = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!a.flat(i).is_zero() && !b.flat(j).is_zero()) t.flat(k) = a.flat(i) * b.flat(j);
      ++k;
    }
  return t;
}

TensorField contract(const TensorField& t, int up_slot, int down_slot) {
  const int r = t.rank();
  if (up_slot < 0 || up_slot >= r || down_slot < 0 || down_slot >= r || up_slot == down_slot) {
    throw InputError("contract: slot out of range");
  }
  const SlotKind ku = t.signature()[static_cast<std::size_t>(up_slot)];
  const SlotKind kd = t.signature()[static_cast<std::size_t>(down_slot)];
  if (!is_up(ku) || is_up(kd)) throw InputError("contract: slots must be one up and one down");
  if (dual(ku) != kd) throw InputError("contract: slot dimensions differ");
  Signature sig;
  for (int s = 0; s < r; ++s)
    if (s != up_slot && s != down_slot) sig.push_back(t.signature()[static_cast<std::size_t>(s)]);
  TensorField out(t.space(), sig, t.order());
  const int dim = t.dims()[static_cast<std::size_t>(up_slot)];
  std::vector<int> full(static_cast<std::size_t>(r));
  for_each_index(out.dims(), [&](const std::vector<int>& idx) {
    std::size_t q = 0;
    for (int s = 0; s < r; ++s)
      if (s != up_slot && s != down_slot) full[static_cast<std::size_t>(s)] = idx[q++];
    JetPoly sum(t.space().num_vars(), t.order());
    for (int k = 0; k < dim; ++k) {
      full[static_cast<std::size_t>(up_slot)] = k;
      full[static_cast<std::size_t>(down_slot)] = k;
      sum += t.at(full);
    }
    out.at(idx) = std::move(sum);
  });
  return out;
}

TensorField sym_antisym(const TensorField& t, int slot_a, int slot_b, SymMode mode) {
  const int r = t.rank();
  if (slot_a < 0 || slot_a >= r || slot_b < 0 || slot_b >= r) throw InputError("sym_antisym: slot out of range");
  if (t.signature()[static_cast<std::size_t>(slot_a)] != t.signature()[static_cast<std::size_t>(slot_b)]) {
    throw InputError("sym_antisym: slot kinds differ");
  }
  std::vector<int> perm(static_cast<std::size_t>(r));
  for (int s = 0; s < r; ++s) perm[static_cast<std::size_t>(s)] = s;
  std::swap(perm[static_cast<std::size_t>(slot_a)], perm[static_cast<std::size_t>(slot_b)]);
  const TensorField swapped = permute(t, perm);
  TensorField out = mode == SymMode::Sym ? t + swapped : t - swapped;
  return out * Rational(1, 2);
}

TensorField permute(const TensorField& t, std::span<const int> perm) {
  const int r = t.rank();
  if (static_cast<int>(perm.size()) != r) throw InputError("permute: wrong permutation length");
  std::vector<bool> seen(static_cast<std::size_t>(r), false);
  Signature sig;
  for (int p : perm) {
    if (p < 0 || p >= r || seen[static_cast<std::size_t>(p)]) throw InputError("permute: not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
    sig.push_back(t.signature()[static_cast<std::size_t>(p)]);
  }
  TensorField out(t.space(), sig, t.order());
  std::vector<int> src(static_cast<std::size_t>(r));
  for_each_index(out.dims(), [&](const std::vector<int>& idx) {
    for (int k = 0; k < r; ++k) src[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = idx[static_cast<std::size_t>(k)];
    out.at(idx) = t.at(src);
  });
  return out;
}

TensorField kronecker(Space space, SlotKind up_kind, int order) {
  if (!is_up(up_kind)) throw InputError("kronecker: first slot must be an up slot");
  TensorField t(space, {up_kind, dual(up_kind)}, order);
  for (int a = 0; a < t.dims()[0]; ++a) t.at({a, a}) = JetPoly::constant(space.num_vars(), order, 1);
  return t;
}

TensorField liouville(Space space, int order) {
  if (space.kind != SpaceKind::E) throw InputError("liouville: defined on E only");
  TensorField t(space, {SlotKind::FiberUp}, order);
  for (int i = 0; i < space.n; ++i) t.at({i}) = JetPoly::variable(space.num_vars(), order, space.y_var(i));
  return t;
}

TensorField partial(const TensorField& t, int var) {
  return t.map([var](const JetPoly& p) { return partial(p, var); });
}

TensorField embed(const TensorField& t, Space target) {
  if (target.m != t.space().m || target.n != t.space().n) throw InputError("embed: dimension mismatch");
  if (target.num_vars() < t.space().num_vars()) throw InputError("embed: target space is smaller");
  TensorField out(target, t.signature(), t.order());
  for (std::size_t k = 0; k < t.size(); ++k) out.flat(k) = t.flat(k).embedded(target.num_vars());
  return out;
}

TensorField compose(const TensorField& t, std::span<const JetPoly> inners, Space target) {
  if (target.m != t.space().m || target.n != t.space().n) throw InputError("compose: dimension mismatch");
  std::vector<JetPoly> flat;
  flat.reserve(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) flat.push_back(t.flat(k));
  auto out_flat = compose_all(flat, inners);
  TensorField out(target, t.signature(), 0);
  for (std::size_t k = 0; k < t.size(); ++k) out.flat(k) = std::move(out_flat[k]);
  return out;
}

std::vector<Rational> evaluate(const TensorField& t, std::span<const Rational> point) {
  std::vector<Rational> v;
  v.reserve(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) v.push_back(evaluate(t.flat(k), point));
  return v;
}

TensorField map_slot(const TensorField& t, int slot, const JetMatrix& map, SlotKind new_kind) {
  if (slot < 0 || slot >= t.rank()) throw InputError("map_slot: slot out of range");
  const int old_dim = t.dims()[static_cast<std::size_t>(slot)];
  const int new_dim = slot_dim(new_kind, t.space().m, t.space().n);
  if (map.rows() != new_dim || map.cols() != old_dim) throw InputError("map_slot: map has wrong shape");
  Signature sig = t.signature();
  sig[static_cast<std::size_t>(slot)] = new_kind;
  TensorField out(t.space(), sig, std::min(t.order(), map.order()));
  std::vector<int> src;
  for_each_index(out.dims(), [&](const std::vector<int>& idx) {
    src = idx;
    JetPoly sum(t.space().num_vars(), out.order());
    const int a = idx[static_cast<std::size_t>(slot)];
    for (int b = 0; b < old_dim; ++b) {
      if (map(a, b).is_zero()) continue;
      src[static_cast<std::size_t>(slot)] = b;
      const JetPoly& c = t.at(src);
      if (!c.is_zero()) sum += map(a, b) * c;
    }
    out.at(idx) = std::move(sum);
  });
  return out;
}

TensorField inject_slot(const TensorField& t, int slot) {
  if (slot < 0 || slot >= t.rank()) throw InputError("inject_slot: slot out of range");
  const SlotKind k = t.signature()[static_cast<std::size_t>(slot)];
  const int m = t.space().m;
  const int n = t.space().n;
  const int nv = t.space().num_vars();
  const SlotKind target = is_up(k) ? SlotKind::TotalUp : SlotKind::TotalDown;
  JetMatrix inj(m + n, slot_dim(k, m, n), nv, t.order());
  if (k == SlotKind::BaseUp || k == SlotKind::BaseDown) {
    for (int l = 0; l < m; ++l) inj(l, l) = JetPoly::constant(nv, t.order(), 1);
  } else if (k == SlotKind::FiberUp || k == SlotKind::FiberDown) {
    for (int i = 0; i < n; ++i) inj(m + i, i) = JetPoly::constant(nv, t.order(), 1);
  } else {
    throw InputError("inject_slot: slot is already a total slot");
  }
  return map_slot(t, slot, inj, target);
}

}  // namespace bundleconn
