package com.example;

public interface I {
    String greet(String name);
}
