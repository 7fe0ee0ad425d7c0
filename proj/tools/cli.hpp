#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "radiofine/simulate.hpp"
#include "radiofine/text.hpp"

namespace radiofine::cli {

inline constexpr const char* kToolName = "radiofine";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitIo = 3,
    kExitData = 4,
};

// Entry point shared by the binary and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct ConvertResult {
    std::vector<TestDataset> datasets;
    // (calendar date, rows dropped) for dates whose row count is not a
    // multiple of the group size
    std::vector<std::pair<double, std::size_t>> leftovers;
};

// Groups simulation rows (cal_date, age, sd[, cal_mean, cal_median,
// cal_sigma]) by calendar date into consecutive clusters of group_size.
// Dates appear in ascending order; rows keep their input order.
ConvertResult convert_rsim_to_tests(const CsvDocument& rows, int group_size = 3);

}  // namespace radiofine::cli
