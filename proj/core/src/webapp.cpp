#include "range/webapp.hpp"

#include <cstdio>

#include "range/logtime.hpp"

namespace range::webapp {

const char* to_string(Method m) { return m == Method::Get ? "GET" : "POST"; }

std::optional<Method> parse_method(const std::string& text) {
  if (text == "GET") return Method::Get;
  if (text == "POST") return Method::Post;
  return std::nullopt;
}

Server::Server(Endpoint host, std::vector<UserAccount> accounts,
               std::uint64_t seed)
    : host_(host), seed_(seed) {
  for (auto& a : accounts) accounts_.emplace(a.username, std::move(a));
}

std::string Server::issue_session(const std::string& user) {
  const std::uint64_t token =
      splitmix64(seed_ ^ splitmix64(++session_counter_));
  char buf[24];
  std::snprintf(buf, sizeof(buf), "sess-%016llx",
                static_cast<unsigned long long>(token));
  sessions_.emplace(buf, user);
  return buf;
}

bool Server::session_valid(const std::string& token) const {
  return sessions_.contains(token);
}

HttpExchange Server::handle(const HttpRequest& req) {
  HttpExchange x;
  x.request = req;

  const auto lookup_form = [&](const char* key) -> std::string {
    const auto it = req.form.find(key);
    return it == req.form.end() ? std::string() : it->second;
  };
  const auto client_session = session_by_client_.find(req.src.ip);
  if (client_session != session_by_client_.end()) {
    const auto s = sessions_.find(client_session->second);
    if (s != sessions_.end()) x.auth_user = s->second;
  }

  if (req.path == "/login.php" && req.method == Method::Post) {
    const std::string user = lookup_form("username");
    const std::string password = lookup_form("password");
    const auto acct = accounts_.find(user);
    if (acct != accounts_.end() && acct->second.password == password) {
      x.status = 302;
      x.outcome = Outcome::AuthSuccess;
      x.response_bytes = sizes_.redirect;
      const std::string token = issue_session(user);
      session_by_client_[req.src.ip] = token;
      x.session_id = token;
      x.auth_user = user;
    } else {
      // PHP-style in-page error: the page renders normally with status 200.
      x.status = 200;
      x.outcome = Outcome::AuthFailure;
      x.response_bytes = sizes_.login;
    }
    return x;
  }

  if (req.path == "/register.php" && req.method == Method::Post) {
    const std::string user = lookup_form("username");
    const std::string password = lookup_form("password");
    if (!user.empty() && !password.empty() && !accounts_.contains(user))
      accounts_.emplace(user, UserAccount{user, password, req.ts});
    x.status = 200;
    x.outcome = Outcome::PageOk;
    x.response_bytes = sizes_.register_page;
    return x;
  }

  std::size_t size = 0;
  if (req.path == "/login.php") size = sizes_.login;
  else if (req.path == "/index.php" || req.path == "/") size = sizes_.index;
  else if (req.path == "/register.php") size = sizes_.register_page;
  else if (req.path == "/logout.php") size = sizes_.logout;

  if (size == 0) {
    x.status = 404;
    x.outcome = Outcome::NotFound;
    x.response_bytes = sizes_.not_found;
    return x;
  }

  if (req.path == "/logout.php" && client_session != session_by_client_.end()) {
    sessions_.erase(client_session->second);
    session_by_client_.erase(client_session);
  }
  x.status = 200;
  x.outcome = Outcome::PageOk;
  x.response_bytes = size;
  return x;
}

std::string render_access_log(const HttpExchange& x) {
  const HttpRequest& r = x.request;
  const std::string user = x.auth_user.empty() ? "-" : x.auth_user;
  std::string line;
  line.reserve(128);
  line += to_string(r.src.ip);
  line += " - ";
  line += user;
  line += " [";
  line += format_access_time(r.ts);
  line += "] \"";
  line += to_string(r.method);
  line += ' ';
  line += r.path;
  line += " HTTP/1.1\" ";
  line += std::to_string(x.status);
  line += ' ';
  line += std::to_string(x.response_bytes);
  line += " \"-\" \"";
  line += r.user_agent;
  line += '"';
  return line;
}

std::optional<std::string> render_error_log(const HttpExchange& x) {
  if (x.outcome != Outcome::AuthFailure) return std::nullopt;
  const HttpRequest& r = x.request;
  const auto it = r.form.find("username");
  const std::string user = it == r.form.end() ? "-" : it->second;
  std::string line;
  line.reserve(128);
  line += '[';
  line += format_error_time(r.ts);
  line += "] [auth:error] [pid 1000] [client ";
  line += to_string(r.src.ip);
  line += ':';
  line += std::to_string(r.src.port);
  line += "] user ";
  line += user;
  line += ": authentication failure for \"/login.php\"";
  return line;
}

}  // namespace range::webapp
