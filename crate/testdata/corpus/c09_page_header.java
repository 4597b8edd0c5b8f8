class PageHeader {
    private String titleStr;
    private String heading;

    void set(String a, String b) {
        titleStr = a;
        heading = b;
    }

    public void render() {
        // <start>
        print(title);
        print(titles);
        // <end>
    }
}
