#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace trap::io {

/// Little-endian binary writer backed by an in-memory buffer so files
/// can be written atomically (temp + rename).
class Writer {
  public:
    void u32(uint32_t v) { raw(&v, 4); }
    void u64(uint64_t v) { raw(&v, 8); }
    void f32(float v) { raw(&v, 4); }
    void bytes(const void* p, size_t n) { raw(p, n); }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    const std::vector<char>& buffer() const { return buf_; }

  private:
    void raw(const void* p, size_t n) {
        const char* c = static_cast<const char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    std::vector<char> buf_;
};

class Reader {
  public:
    Reader(const char* data, size_t size) : data_(data), size_(size) {}
    uint32_t u32() { uint32_t v; raw(&v, 4); return v; }
    uint64_t u64() { uint64_t v; raw(&v, 8); return v; }
    float f32() { float v; raw(&v, 4); return v; }
    void bytes(void* p, size_t n) { raw(p, n); }
    std::string str() {
        uint32_t n = u32();
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
    size_t offset() const { return pos_; }
    bool done() const { return pos_ == size_; }

  private:
    void raw(void* p, size_t n);
    const char* data_;
    size_t size_, pos_ = 0;
};

std::vector<char> read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::vector<char>& data);
void write_file_atomic(const std::string& path, const std::string& data);

}  // namespace trap::io
