#ifndef EVIMAP_TESTS_FIXTURE_HPP
#define EVIMAP_TESTS_FIXTURE_HPP

#include <string>

#include "evimap/dataset.hpp"

namespace evimap::testing {

inline std::string fixture_path(const std::string& name) { return std::string(EVIMAP_FIXTURE_DIR) + "/" + name; }
inline std::string test_data_path(const std::string& name) {
  return std::string(EVIMAP_TEST_DATA_DIR) + "/" + name;
}

inline const Dataset& fixture() {
  static const Dataset ds = load_dataset(fixture_path("trials.csv"), fixture_path("outcomes.csv"));
  return ds;
}

}  // namespace evimap::testing

#endif  // EVIMAP_TESTS_FIXTURE_HPP
