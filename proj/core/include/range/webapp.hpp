#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "range/net.hpp"

namespace range::webapp {

struct UserAccount {
  std::string username;
  std::string password;
  Micros created_at = 0;

  bool operator==(const UserAccount&) const = default;
};

enum class Method { Get, Post };

const char* to_string(Method m);
std::optional<Method> parse_method(const std::string& text);

struct HttpRequest {
  Micros ts = 0;
  Endpoint src;
  Endpoint dst;
  Method method = Method::Get;
  std::string path;
  std::string user_agent;
  std::map<std::string, std::string> form;  // login/register POST bodies

  bool operator==(const HttpRequest&) const = default;
};

enum class Outcome { AuthSuccess, AuthFailure, PageOk, NotFound };

struct HttpExchange {
  HttpRequest request;
  int status = 0;
  std::size_t response_bytes = 0;
  Outcome outcome = Outcome::PageOk;
  std::optional<std::string> session_id;
  std::string auth_user;  // logged as %u when non-empty
};

// Page payload sizes; arbitrary constants kept fixed so runs are byte-stable.
struct PageSizes {
  std::size_t login = 512;
  std::size_t index = 1043;
  std::size_t register_page = 734;
  std::size_t logout = 221;
  std::size_t not_found = 196;
  std::size_t redirect = 231;
};

// The five-page authentication app. The database-connection page is internal
// and not routable, so four paths are public.
class Server {
 public:
  Server(Endpoint host, std::vector<UserAccount> accounts, std::uint64_t seed);

  HttpExchange handle(const HttpRequest& req);

  bool session_valid(const std::string& token) const;
  const std::map<std::string, UserAccount>& accounts() const {
    return accounts_;
  }
  const PageSizes& sizes() const { return sizes_; }

 private:
  std::string issue_session(const std::string& user);

  Endpoint host_;
  PageSizes sizes_;
  std::map<std::string, UserAccount> accounts_;
  std::map<std::string, std::string> sessions_;       // token -> user
  std::map<Ipv4, std::string> session_by_client_;     // src ip -> token
  std::uint64_t seed_;
  std::uint64_t session_counter_ = 0;
};

// Apache combined format; %l is always "-", %u the authenticated user or "-".
std::string render_access_log(const HttpExchange& x);

// One line per failed login, empty otherwise.
std::optional<std::string> render_error_log(const HttpExchange& x);

}  // namespace range::webapp
