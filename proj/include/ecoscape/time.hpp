// Copyright 2026 The Ecoscape Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace ecoscape {

/// A span of simulated time. Stored as integral microseconds so that event
/// ordering and arithmetic never depend on floating-point rounding; the
/// public API speaks milliseconds and seconds.
class Duration {
 public:
  constexpr Duration() = default;

  static constexpr Duration micros(std::int64_t us) { return Duration(us); }
  static Duration millis(double ms) {
    return Duration(static_cast<std::int64_t>(std::llround(ms * 1000.0)));
  }
  static Duration seconds(double s) {
    return Duration(static_cast<std::int64_t>(std::llround(s * 1e6)));
  }

  constexpr std::int64_t count_us() const { return us_; }
  constexpr double as_millis() const { return static_cast<double>(us_) / 1000.0; }
  constexpr double as_seconds() const { return static_cast<double>(us_) / 1e6; }

  constexpr bool is_zero() const { return us_ == 0; }
  constexpr bool is_negative() const { return us_ < 0; }

  friend constexpr Duration operator+(Duration a, Duration b) { return Duration(a.us_ + b.us_); }
  friend constexpr Duration operator-(Duration a, Duration b) { return Duration(a.us_ - b.us_); }
  friend constexpr Duration operator*(Duration a, std::int64_t k) { return Duration(a.us_ * k); }
  Duration& operator+=(Duration o) {
    us_ += o.us_;
    return *this;
  }
  Duration& operator-=(Duration o) {
    us_ -= o.us_;
    return *this;
  }

  friend constexpr bool operator==(Duration a, Duration b) { return a.us_ == b.us_; }
  friend constexpr bool operator!=(Duration a, Duration b) { return a.us_ != b.us_; }
  friend constexpr bool operator<(Duration a, Duration b) { return a.us_ < b.us_; }
  friend constexpr bool operator<=(Duration a, Duration b) { return a.us_ <= b.us_; }
  friend constexpr bool operator>(Duration a, Duration b) { return a.us_ > b.us_; }
  friend constexpr bool operator>=(Duration a, Duration b) { return a.us_ >= b.us_; }

 private:
  constexpr explicit Duration(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

/// Instant on the simulation clock, measured from run start.
using SimTime = Duration;

constexpr Duration kZeroDuration = Duration::micros(0);

inline Duration max(Duration a, Duration b) { return a < b ? b : a; }
inline Duration min(Duration a, Duration b) { return a < b ? a : b; }

}  // namespace ecoscape
