#pragma once

#include <atomic>
#include <cstdint>

namespace goalrec {

/// Process-wide count of planner invocations (geometric RRT* searches and
/// top-k plan enumerations). The recognizer never touches it; experiments
/// diff it around the offline and online phases.
class PlannerCalls {
 public:
  static std::uint64_t count() { return counter().load(); }
  static void record() { counter().fetch_add(1); }

 private:
  static std::atomic<std::uint64_t>& counter() {
    static std::atomic<std::uint64_t> c{0};
    return c;
  }
};

}  // namespace goalrec
