#pragma once

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "radiofine/calcurve.hpp"
#include "radiofine/error.hpp"

namespace rftest {

inline std::string curve_path() { return RADIOFINE_CURVE_FILE; }
inline std::string data_path(const std::string& name) { return std::string(RADIOFINE_TEST_DATA_DIR) + "/" + name; }

// c14 age == cal BP, i.e. mu(t) = 1950 - t, over calendar [-2050, 1950].
inline radiofine::CalCurve linear_curve(double error = 0.01) {
    std::vector<radiofine::CurveKnot> knots;
    for (int bp = 0; bp <= 4000; bp += 10) {
        knots.push_back({static_cast<double>(bp), static_cast<double>(bp), error});
    }
    return radiofine::CalCurve("linear", std::move(knots));
}

// Constant age `mu` over calendar [-300, 0].
inline radiofine::CalCurve flat_curve(double mu, double error) {
    return radiofine::CalCurve("flat", {{1950.0, mu, error}, {2250.0, mu, error}});
}

}  // namespace rftest

// Asserts `stmt` throws `type` whose message contains `needle`.
#define EXPECT_THROW_MSG(stmt, type, needle)                                             \
    do {                                                                                 \
        try {                                                                            \
            stmt;                                                                        \
            ADD_FAILURE() << "no exception from " #stmt;                                 \
        } catch (const type& e) {                                                        \
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what(); \
        }                                                                                \
    } while (0)
