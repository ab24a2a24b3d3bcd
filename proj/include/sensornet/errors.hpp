#ifndef SENSORNET_ERRORS_HPP
#define SENSORNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sensornet {

struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct SingularConditioningBlock : std::runtime_error {
  explicit SingularConditioningBlock(const std::string& what) : std::runtime_error(what) {}
};

struct SingularDowndate : std::runtime_error {
  explicit SingularDowndate(const std::string& what) : std::runtime_error(what) {}
};

struct TooLargeToEnumerate : std::runtime_error {
  explicit TooLargeToEnumerate(const std::string& what) : std::runtime_error(what) {}
};

struct OutcomeSpaceTooLarge : std::runtime_error {
  explicit OutcomeSpaceTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct NonFinite : std::runtime_error {
  explicit NonFinite(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidInput : std::runtime_error {
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sensornet

#endif
