#pragma once

#include <gtest/gtest.h>

#include "uclab/error.hpp"

// Asserts that the statement throws uclab::Error carrying the given code.
#define EXPECT_UCLAB_ERROR(stmt, expected_code)                                              \
  do {                                                                                       \
    try {                                                                                    \
      stmt;                                                                                  \
      ADD_FAILURE() << "no exception from " #stmt;                                           \
    } catch (const uclab::Error& e_) {                                                       \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                                      \
    }                                                                                        \
  } while (0)

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}
