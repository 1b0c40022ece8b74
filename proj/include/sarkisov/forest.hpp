#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "error.hpp"

namespace sarkisov {

/* A cluster of (possibly infinitely near) points over the base plane.
   Point i (1-based) is proper (parent == 0) or lies first order on the
   exceptional curve of point parent(i) < i.  satellites(i) lists further
   strict ancestors i is proximate to. A point is proximate to at most two
   points: its parent and at most one satellite. */
class ProximityForest {
 public:
  struct Point {
    int parent = 0;               // 0 = proper point of the plane
    std::vector<int> satellites;  // strict ancestors beyond the parent
  };

  ProximityForest() = default;
  explicit ProximityForest(std::vector<Point> pts) : pts_(std::move(pts)) {
    validate();
  }

  int size() const { return static_cast<int>(pts_.size()); }
  const Point& point(int i) const { return pts_[static_cast<std::size_t>(i) - 1]; }
  const std::vector<Point>& points() const { return pts_; }

  /* The points i is proximate to: parent plus satellites. */
  std::vector<int> proximate_to(int i) const {
    std::vector<int> out;
    const Point& p = point(i);
    if (p.parent != 0) out.push_back(p.parent);
    out.insert(out.end(), p.satellites.begin(), p.satellites.end());
    return out;
  }

  /* The points j proximate to i (i.e. i appears in prox(j)). */
  std::vector<int> proximate_from(int i) const {
    std::vector<int> out;
    for (int j = 1; j <= size(); ++j) {
      auto pr = proximate_to(j);
      if (std::find(pr.begin(), pr.end(), i) != pr.end()) out.push_back(j);
    }
    return out;
  }

  bool is_strict_ancestor(int anc, int i) const {
    int cur = point(i).parent;
    while (cur != 0) {
      if (cur == anc) return true;
      cur = point(cur).parent;
    }
    return false;
  }

  /* Proximity inequality: m_i >= sum of m_j over j proximate to i. */
  template <class Num>
  bool proximity_ok(const std::vector<Num>& m) const {
    check(static_cast<int>(m.size()) == size(), errc::instance_error,
          "multiplicity vector length mismatch");
    for (int i = 1; i <= size(); ++i) {
      Num rhs = Num(0);
      for (int j : proximate_from(i)) rhs += m[static_cast<std::size_t>(j) - 1];
      if (m[static_cast<std::size_t>(i) - 1] < rhs) return false;
    }
    return true;
  }

  ProximityForest extended(Point p) const {
    std::vector<Point> pts = pts_;
    pts.push_back(std::move(p));
    return ProximityForest(std::move(pts));
  }

  bool operator==(const ProximityForest& o) const {
    if (size() != o.size()) return false;
    for (int i = 1; i <= size(); ++i)
      if (point(i).parent != o.point(i).parent ||
          point(i).satellites != o.point(i).satellites)
        return false;
    return true;
  }

 private:
  void validate() const {
    for (int i = 1; i <= size(); ++i) {
      const Point& p = point(i);
      check(p.parent >= 0 && p.parent < i, errc::instance_error,
            "point " + std::to_string(i) + ": parent must be 0 or an earlier point");
      if (p.parent == 0) {
        check(p.satellites.empty(), errc::instance_error,
              "point " + std::to_string(i) + ": proper points have no satellites");
        continue;
      }
      check(p.satellites.size() <= 1, errc::instance_error,
            "point " + std::to_string(i) + ": proximate to more than two points");
      for (int s : p.satellites) {
        check(s >= 1 && s < i && s != p.parent, errc::instance_error,
              "point " + std::to_string(i) + ": bad satellite index");
        check(is_strict_ancestor(s, i), errc::instance_error,
              "point " + std::to_string(i) + ": satellite " + std::to_string(s) +
                  " is not a strict ancestor");
      }
    }
  }

  std::vector<Point> pts_;
};

}  // namespace sarkisov
