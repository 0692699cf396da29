#pragma once

#include <atomic>
#include <chrono>

#include "sg/domain.hpp"

namespace sg {

/// Source of "now" in whole seconds.
class TimeSource {
public:
  virtual ~TimeSource() = default;
  virtual Seconds now() const = 0;
};

class SystemTimeSource : public TimeSource {
public:
  Seconds now() const override {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
};

/// Virtual time, advanced explicitly by its owner.
class ManualTimeSource : public TimeSource {
public:
  explicit ManualTimeSource(Seconds start = 0) : now_(start) {}
  Seconds now() const override { return now_.load(); }
  void set(Seconds t) { now_.store(t); }
  void advance(Seconds dt) { now_.fetch_add(dt); }

private:
  std::atomic<Seconds> now_;
};

}  // namespace sg
