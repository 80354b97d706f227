package com.example;

import javax.inject.Named;

@Named
public class A implements I {
    @Override
    public String greet(String name) {
        return "hello " + name;
    }
}
