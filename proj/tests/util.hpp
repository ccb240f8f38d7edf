#pragma once

#include <gtest/gtest.h>

#include <pgrowth/errors.hpp>

#define EXPECT_ERRC(stmt, errc)                                                     \
  do {                                                                              \
    bool thrown_ = false;                                                           \
    try {                                                                           \
      stmt;                                                                         \
    } catch (const ::pgrowth::Error& e_) {                                          \
      thrown_ = true;                                                               \
      EXPECT_EQ(::pgrowth::errc_name(e_.code()), ::pgrowth::errc_name(errc)) << e_.what(); \
    }                                                                               \
    EXPECT_TRUE(thrown_) << "expected " << ::pgrowth::errc_name(errc);              \
  } while (0)
