class Bootstrap {
    void init(Registry r) {
    }

    public void rebuild(String name) {
        // <start>
        init(reg);
        reg.register(name);
        // <end>
    }
}
