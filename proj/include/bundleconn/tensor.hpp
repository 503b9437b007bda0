#pragma once

// Dense tensor fields with typed slots over M, E or J1E.
//
// Coordinates are packed into one variable list per space:
//   M   : x^0..x^{m-1}
//   E   : x, then y^i at index m+i
//   J1E : x, y, then y^i_l at index m+n+i*m+l
// A total-space index A < m is the base index A; A >= m is the fiber index A-m.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bundleconn/jet.hpp"

namespace bundleconn {

enum class SpaceKind { M, E, J1E };

struct Space {
  SpaceKind kind = SpaceKind::M;
  int m = 1;
  int n = 1;

  static Space base(int m, int n) { return {SpaceKind::M, m, n}; }
  static Space total(int m, int n) { return {SpaceKind::E, m, n}; }
  static Space jet(int m, int n) { return {SpaceKind::J1E, m, n}; }

  int num_vars() const;
  int x_var(int lambda) const { return lambda; }
  int y_var(int i) const { return m + i; }
  int ylam_var(int i, int lambda) const { return m + n + i * m + lambda; }

  friend bool operator==(const Space&, const Space&) = default;
};

std::string to_string(SpaceKind kind);

enum class SlotKind { BaseUp, BaseDown, FiberUp, FiberDown, TotalUp, TotalDown };

bool is_up(SlotKind k);
SlotKind dual(SlotKind k);
int slot_dim(SlotKind k, int m, int n);
std::string to_string(SlotKind k);

using Signature = std::vector<SlotKind>;

class TensorField {
 public:
  TensorField() = default;
  /// Zero tensor; components are zero jets of the given order.
  TensorField(Space space, Signature signature, int order);

  const Space& space() const { return space_; }
  const Signature& signature() const { return signature_; }
  int rank() const { return static_cast<int>(signature_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return components_.size(); }
  /// Smallest component order.
  int order() const;

  JetPoly& at(std::span<const int> index);
  const JetPoly& at(std::span<const int> index) const;
  JetPoly& at(std::initializer_list<int> index) { return at(std::span<const int>(index.begin(), index.size())); }
  const JetPoly& at(std::initializer_list<int> index) const {
    return at(std::span<const int>(index.begin(), index.size()));
  }
  JetPoly& flat(std::size_t k) { return components_[k]; }
  const JetPoly& flat(std::size_t k) const { return components_[k]; }
  std::vector<int> unflatten(std::size_t k) const;
  std::size_t flatten(std::span<const int> index) const { return offset(index); }

  bool is_zero() const;
  TensorField truncated(int order) const;
  /// Applies `f` to every component.
  TensorField map(const std::function<JetPoly(const JetPoly&)>& f) const;

  TensorField& operator+=(const TensorField& other);
  TensorField& operator-=(const TensorField& other);
  TensorField& operator*=(const Rational& c);
  friend TensorField operator+(TensorField a, const TensorField& b) { return a += b; }
  friend TensorField operator-(TensorField a, const TensorField& b) { return a -= b; }
  friend TensorField operator*(TensorField a, const Rational& c) { return a *= c; }
  friend TensorField operator*(const Rational& c, TensorField a) { return a *= c; }
  friend bool operator==(const TensorField& a, const TensorField& b);

 private:
  std::size_t offset(std::span<const int> index) const;

  Space space_;
  Signature signature_;
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::vector<JetPoly> components_;
};

/// Calls `f` with every index tuple of the given shape, last index fastest.
void for_each_index(const std::vector<int>& dims, const std::function<void(const std::vector<int>&)>& f);

TensorField tensor_product(const TensorField& a, const TensorField& b);
TensorField contract(const TensorField& t, int up_slot, int down_slot);

enum class SymMode { Sym, Antisym };
TensorField sym_antisym(const TensorField& t, int slot_a, int slot_b, SymMode mode);

/// Slot k of the result is slot perm[k] of `t`.
TensorField permute(const TensorField& t, std::span<const int> perm);

TensorField kronecker(Space space, SlotKind up_kind, int order);
/// The vertical field y^i d/dy^i on E.
TensorField liouville(Space space, int order);

/// Componentwise partial derivative; order drops by one.
TensorField partial(const TensorField& t, int var);
/// Reinterprets components in a larger space (M -> E -> J1E prefix embedding).
TensorField embed(const TensorField& t, Space target);
/// Substitutes jets for the variables of every component.
TensorField compose(const TensorField& t, std::span<const JetPoly> inners, Space target);
/// Flattened values at a point.
std::vector<Rational> evaluate(const TensorField& t, std::span<const Rational> point);

/// Applies a linear map to one slot: result[..a..] = sum_b map(a, b) t[..b..].
TensorField map_slot(const TensorField& t, int slot, const JetMatrix& map, SlotKind new_kind);

/// Coordinate injection of a Base or Fiber slot into the Total slot of matching variance.
TensorField inject_slot(const TensorField& t, int slot);

}  // namespace bundleconn
