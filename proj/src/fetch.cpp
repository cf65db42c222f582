#include <curl/curl.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>

#include "prove/text_retrieval.hpp"

namespace prove {

namespace {

std::size_t write_body(char* data, std::size_t size, std::size_t count, void* user) {
  static_cast<std::string*>(user)->append(data, size * count);
  return size * count;
}

void global_init() {
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

struct CurlHandle {
  CURL* handle = curl_easy_init();
  ~CurlHandle() {
    if (handle != nullptr) curl_easy_cleanup(handle);
  }
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Percent-decodes the path of a file: URL.
std::string file_url_path(const std::string& url) {
  std::string path = url.substr(5);
  if (path.starts_with("//")) {
    // file://host/path; only the empty host and localhost are meaningful.
    const auto slash = path.find('/', 2);
    path = slash == std::string::npos ? std::string() : path.substr(slash);
  }
  std::string decoded;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] == '%' && i + 2 < path.size() && std::isxdigit(static_cast<unsigned char>(path[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(path[i + 2]))) {
      decoded.push_back(static_cast<char>(std::stoi(path.substr(i + 1, 2), nullptr, 16)));
      i += 2;
    } else {
      decoded.push_back(path[i]);
    }
  }
  return decoded;
}

FetchResult fetch_file(const std::string& url) {
  const std::string path = file_url_path(url);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kUnavailable, "cannot read " + url);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return {url, buffer.str()};
}

bool is_html_type(const std::string& content_type) {
  const std::string type = lower(content_type.substr(0, content_type.find(';')));
  return type.empty() || type == "text/html" || type == "application/xhtml+xml";
}

}  // namespace

FetchResult fetch(const std::string& url, const FetchOptions& options) {
  const std::string scheme = lower(url.substr(0, url.find(':')));
  if (scheme == "file") return fetch_file(url);
  if (scheme != "http" && scheme != "https") {
    fail(ErrorCode::kInvalidArgument, "unsupported URL '" + url + "'");
  }
  if (options.offline) fail(ErrorCode::kOffline, "refusing to fetch " + url + " in offline mode");

  global_init();
  CurlHandle curl;
  if (curl.handle == nullptr) fail(ErrorCode::kUnavailable, "cannot initialise HTTP client");
  std::string body;
  curl_easy_setopt(curl.handle, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.handle, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.handle, CURLOPT_MAXREDIRS, options.max_redirects);
  curl_easy_setopt(curl.handle, CURLOPT_TIMEOUT_MS, static_cast<long>(options.timeout.count()));
  curl_easy_setopt(curl.handle, CURLOPT_USERAGENT, options.user_agent.c_str());
  curl_easy_setopt(curl.handle, CURLOPT_ACCEPT_ENCODING, "");
  curl_easy_setopt(curl.handle, CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(curl.handle, CURLOPT_WRITEFUNCTION, write_body);
  curl_easy_setopt(curl.handle, CURLOPT_WRITEDATA, &body);

  const CURLcode rc = curl_easy_perform(curl.handle);
  if (rc == CURLE_OPERATION_TIMEDOUT) fail(ErrorCode::kTimeout, "timed out fetching " + url);
  if (rc != CURLE_OK) {
    fail(ErrorCode::kUnavailable, "fetching " + url + " failed: " + curl_easy_strerror(rc));
  }
  long status = 0;
  curl_easy_getinfo(curl.handle, CURLINFO_RESPONSE_CODE, &status);
  if (status >= 400) {
    fail(ErrorCode::kUnavailable, url + " answered HTTP " + std::to_string(status));
  }
  char* effective = nullptr;
  curl_easy_getinfo(curl.handle, CURLINFO_EFFECTIVE_URL, &effective);
  char* content_type = nullptr;
  curl_easy_getinfo(curl.handle, CURLINFO_CONTENT_TYPE, &content_type);
  if (content_type != nullptr && !is_html_type(content_type)) {
    fail(ErrorCode::kNotHtml, url + " served " + std::string(content_type));
  }
  return {effective != nullptr ? std::string(effective) : url, std::move(body)};
}

std::vector<FetchOutcome> fetch_all(const std::vector<std::string>& urls,
                                    const FetchOptions& options, int max_concurrent) {
  std::vector<FetchOutcome> out(urls.size());
  const std::size_t width = static_cast<std::size_t>(std::max(max_concurrent, 1));
  for (std::size_t wave = 0; wave < urls.size(); wave += width) {
    const std::size_t end = std::min(urls.size(), wave + width);
    std::vector<std::future<void>> running;
    for (std::size_t i = wave; i < end; ++i) {
      running.push_back(std::async(std::launch::async, [&, i] {
        out[i].url = urls[i];
        try {
          out[i].result = fetch(urls[i], options);
        } catch (const Error& e) {
          out[i].error = e;
        }
      }));
    }
    for (auto& f : running) f.get();
  }
  return out;
}

}  // namespace prove
