#pragma once

#include <optional>
#include <string>

#include "range/net.hpp"

namespace range {

// "01/Jan/1970:00:00:00 +0000" (Apache %t without the brackets).
std::string format_access_time(Micros ts);
std::optional<Micros> parse_access_time(const std::string& text);

// "Thu Jan 01 00:00:00.000000 1970" (Apache error-log style).
std::string format_error_time(Micros ts);
std::optional<Micros> parse_error_time(const std::string& text);

// "1970-01-01 00:00:00,000" (fail2ban action log style).
std::string format_ban_time(Micros ts);

}  // namespace range
